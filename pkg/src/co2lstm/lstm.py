"""Stacked LSTM regressor in plain numpy, trained by backpropagation through time.

Shapes follow a batch-major convention: sequences are ``(batch, time, features)``.
Gate blocks inside ``W``, ``U`` and ``b`` are stacked in the order
input, forget, cell candidate, output (``i, f, g, o``).

Every layer but the last returns its full hidden sequence; the last layer's
final hidden state feeds a 1-unit affine head. Dropout (inverted) is applied to
the hidden sequences passed between layers, never to recurrent connections.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    BadWindow,
    EmptyData,
    LengthMismatch,
    NonFiniteLoss,
    ShapeMismatch,
    StaleCache,
)
from .preprocess import SupervisedSet


def sigmoid(x):
    # tanh form never overflows, unlike 1 / (1 + exp(-x))
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass
class LstmLayerParams:
    W: np.ndarray  # (4h, in)
    U: np.ndarray  # (4h, h)
    b: np.ndarray  # (4h,)

    def __post_init__(self):
        h4, _ = self.W.shape
        if h4 % 4 or self.U.shape != (h4, h4 // 4) or self.b.shape != (h4,):
            raise ShapeMismatch(
                f"inconsistent layer shapes W{self.W.shape} U{self.U.shape} b{self.b.shape}"
            )

    @property
    def hidden(self) -> int:
        return self.U.shape[1]

    @property
    def input_size(self) -> int:
        return self.W.shape[1]

    def gate(self, name: str, array: np.ndarray | None = None) -> np.ndarray:
        """View of one gate block (``"i"``, ``"f"``, ``"g"`` or ``"o"``) of ``b`` or ``array``."""
        k = "ifgo".index(name)
        h = self.hidden
        target = self.b if array is None else array
        return target[k * h:(k + 1) * h]


@dataclass
class LstmModel:
    layers: list[LstmLayerParams]
    head_w: np.ndarray  # (h_last,)
    head_b: np.ndarray  # (1,)
    dropout: float = 0.0
    seq_len: int = 30

    def __post_init__(self):
        if not 0 <= self.dropout < 1:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.layers[0].input_size != 1:
            raise ShapeMismatch("first layer must take a scalar input")
        for prev, cur in zip(self.layers, self.layers[1:]):
            if cur.input_size != prev.hidden:
                raise ShapeMismatch(
                    f"layer input size {cur.input_size} does not match previous hidden size {prev.hidden}"
                )
        if self.head_w.shape != (self.layers[-1].hidden,) or self.head_b.shape != (1,):
            raise ShapeMismatch("head shape does not match last layer")

    @property
    def layer_sizes(self) -> list[int]:
        return [layer.hidden for layer in self.layers]

    def parameters(self) -> dict[str, np.ndarray]:
        """Named references to every trainable array (mutating them mutates the model)."""
        params = {}
        for k, layer in enumerate(self.layers):
            params[f"layers.{k}.W"] = layer.W
            params[f"layers.{k}.U"] = layer.U
            params[f"layers.{k}.b"] = layer.b
        params["head.w"] = self.head_w
        params["head.b"] = self.head_b
        return params

    def copy(self) -> "LstmModel":
        return copy.deepcopy(self)

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters().values())


def init_model(layer_sizes=(50, 50, 50), seq_len: int = 30, dropout: float = 0.0, seed: int = 0) -> LstmModel:
    """Glorot-uniform weights, forget-gate bias 1, other biases 0."""
    sizes = list(layer_sizes)
    if not sizes or any(int(h) < 1 for h in sizes):
        raise ValueError("layer sizes must be positive")
    if seq_len < 1:
        raise ValueError("seq_len must be positive")
    rng = np.random.default_rng(seed)

    def glorot(fan_out, fan_in):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_out, fan_in))

    layers = []
    in_size = 1
    for h in sizes:
        b = np.zeros(4 * h)
        b[h:2 * h] = 1.0
        layers.append(LstmLayerParams(glorot(4 * h, in_size), glorot(4 * h, h), b))
        in_size = h
    head_w = glorot(1, in_size)[0]
    return LstmModel(layers, head_w, np.zeros(1), float(dropout), int(seq_len))


class CellCache(NamedTuple):
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    z: np.ndarray  # pre-activations (.., 4h)
    i: np.ndarray
    f: np.ndarray
    g: np.ndarray
    o: np.ndarray
    tanh_c: np.ndarray


def _gates(z: np.ndarray, h: int):
    i = sigmoid(z[..., :h])
    f = sigmoid(z[..., h:2 * h])
    g = np.tanh(z[..., 2 * h:3 * h])
    o = sigmoid(z[..., 3 * h:])
    return i, f, g, o


def cell_forward(p: LstmLayerParams, x_t, h_prev, c_prev):
    """One LSTM step. Works on a single vector or a leading batch axis."""
    x_t, h_prev, c_prev = (np.asarray(a, dtype=float) for a in (x_t, h_prev, c_prev))
    h = p.hidden
    if x_t.shape[-1] != p.input_size or h_prev.shape[-1] != h or c_prev.shape != h_prev.shape:
        raise ShapeMismatch(
            f"cell expects x[..., {p.input_size}], h/c[..., {h}]; "
            f"got {x_t.shape}, {h_prev.shape}, {c_prev.shape}"
        )
    z = x_t @ p.W.T + h_prev @ p.U.T + p.b
    i, f, g, o = _gates(z, h)
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h_t = o * tanh_c
    return h_t, c, CellCache(x_t, h_prev, c_prev, z, i, f, g, o, tanh_c)


class LayerCache(NamedTuple):
    x: np.ndarray      # (B, T, in) layer input
    hs: np.ndarray     # (B, T+1, h) with the zero initial state at index 0
    cs: np.ndarray     # (B, T+1, h)
    acts: np.ndarray   # (B, T, 4h) activated gates i, f, g, o
    tanh_c: np.ndarray  # (B, T, h)


def _layer_forward(p: LstmLayerParams, x: np.ndarray) -> LayerCache:
    batch, steps, _ = x.shape
    h = p.hidden
    zx = x @ p.W.T + p.b
    hs = np.zeros((batch, steps + 1, h))
    cs = np.zeros((batch, steps + 1, h))
    acts = np.empty((batch, steps, 4 * h))
    tanh_c = np.empty((batch, steps, h))
    ut = p.U.T
    for t in range(steps):
        z = zx[:, t] + hs[:, t] @ ut
        i, f, g, o = _gates(z, h)
        c = f * cs[:, t] + i * g
        tc = np.tanh(c)
        cs[:, t + 1] = c
        hs[:, t + 1] = o * tc
        acts[:, t, :h], acts[:, t, h:2 * h], acts[:, t, 2 * h:3 * h], acts[:, t, 3 * h:] = i, f, g, o
        tanh_c[:, t] = tc
    return LayerCache(x, hs, cs, acts, tanh_c)


def _layer_backward(p: LstmLayerParams, cache: LayerCache, dhs: np.ndarray):
    """BPTT through one layer given dLoss/dh_t for every step (B, T, h)."""
    x, hs, cs, acts, tanh_c = cache
    batch, steps, _ = x.shape
    h = p.hidden
    dz = np.empty((batch, steps, 4 * h))
    dh_next = np.zeros((batch, h))
    dc_next = np.zeros((batch, h))
    U = p.U
    for t in reversed(range(steps)):
        i = acts[:, t, :h]
        f = acts[:, t, h:2 * h]
        g = acts[:, t, 2 * h:3 * h]
        o = acts[:, t, 3 * h:]
        tc = tanh_c[:, t]
        dh = dhs[:, t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz[:, t, :h] = dc * g * i * (1.0 - i)
        dz[:, t, h:2 * h] = dc * cs[:, t] * f * (1.0 - f)
        dz[:, t, 2 * h:3 * h] = dc * i * (1.0 - g * g)
        dz[:, t, 3 * h:] = dh * tc * o * (1.0 - o)
        dc_next = dc * f
        dh_next = dz[:, t] @ U
    flat_dz = dz.reshape(-1, 4 * h)
    dW = flat_dz.T @ x.reshape(-1, x.shape[2])
    dU = flat_dz.T @ hs[:, :-1].reshape(-1, h)
    db = flat_dz.sum(axis=0)
    dx = dz @ p.W
    return dx, dW, dU, db


@dataclass
class ForwardCache:
    layers: list[LayerCache]
    masks: list[np.ndarray | None]
    signature: tuple
    last_hidden: np.ndarray
    predictions: np.ndarray = field(repr=False)


def _signature(model: LstmModel) -> tuple:
    return tuple((layer.input_size, layer.hidden) for layer in model.layers)


def _as_batch(model: LstmModel, batch) -> np.ndarray:
    x = np.asarray(batch, dtype=float)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3 or x.shape[2] != 1 or x.shape[0] == 0:
        raise ShapeMismatch(f"expected a nonempty (batch, time) or (batch, time, 1) array, got {x.shape}")
    return x


def forward(model: LstmModel, batch, training: bool = False, rng: np.random.Generator | None = None,
            masks: list | None = None):
    """Predictions ``(batch, 1)`` and the cache needed by ``backward``.

    In training mode with a nonzero dropout rate, fresh inverted-dropout masks
    are drawn from ``rng`` unless ``masks`` (e.g. from an earlier cache) are
    given; masks are stored in the cache so the backward pass reuses them.
    """
    x = _as_batch(model, batch)
    n_between = len(model.layers) - 1
    use_dropout = training and model.dropout > 0
    if masks is not None:
        if len(masks) != n_between:
            raise ShapeMismatch(f"expected {n_between} dropout masks, got {len(masks)}")
    elif use_dropout:
        if rng is None:
            raise ValueError("training with dropout needs an rng")
        masks = [None] * n_between
    else:
        masks = [None] * n_between

    caches = []
    out_masks = []
    inp = x
    for k, layer in enumerate(model.layers):
        cache = _layer_forward(layer, inp)
        caches.append(cache)
        if k == n_between:
            break
        seq = cache.hs[:, 1:]
        mask = masks[k]
        if mask is None and use_dropout:
            keep = 1.0 - model.dropout
            mask = (rng.random(seq.shape) < keep) / keep
        if mask is not None:
            if mask.shape != seq.shape:
                raise ShapeMismatch(f"dropout mask shape {mask.shape} != {seq.shape}")
            seq = seq * mask
        out_masks.append(mask)
        inp = seq
    last = caches[-1].hs[:, -1]
    pred = (last @ model.head_w + model.head_b[0])[:, None]
    return pred, ForwardCache(caches, out_masks, _signature(model), last, pred)


def mse_loss(pred, target):
    """Mean squared error and its gradient with respect to ``pred``."""
    p = np.asarray(pred, dtype=float)
    y = np.asarray(target, dtype=float)
    if p.size != y.size or p.size == 0:
        raise LengthMismatch(f"pred has {p.size} values, target has {y.size}")
    diff = p.ravel() - y.ravel()
    n = diff.size
    return float(diff @ diff) / n, (2.0 * diff / n).reshape(p.shape)


def backward(model: LstmModel, cache: ForwardCache, loss_grad) -> dict[str, np.ndarray]:
    """Exact gradients of the loss for every parameter, keyed like ``model.parameters()``."""
    if cache.signature != _signature(model):
        raise StaleCache(f"cache built for layers {cache.signature}, model has {_signature(model)}")
    dy = np.asarray(loss_grad, dtype=float).reshape(-1)
    batch = cache.last_hidden.shape[0]
    if dy.size != batch:
        raise ShapeMismatch(f"loss gradient has {dy.size} entries for a batch of {batch}")

    grads: dict[str, np.ndarray] = {
        "head.w": cache.last_hidden.T @ dy,
        "head.b": np.array([dy.sum()]),
    }
    top = model.layers[-1]
    steps = cache.layers[-1].x.shape[1]
    dhs = np.zeros((batch, steps, top.hidden))
    dhs[:, -1] = np.outer(dy, model.head_w)
    for k in reversed(range(len(model.layers))):
        layer = model.layers[k]
        dx, dW, dU, db = _layer_backward(layer, cache.layers[k], dhs)
        grads[f"layers.{k}.W"] = dW
        grads[f"layers.{k}.U"] = dU
        grads[f"layers.{k}.b"] = db
        if k > 0:
            mask = cache.masks[k - 1]
            dhs = dx * mask if mask is not None else dx
    return {name: grads[name] for name in model.parameters()}


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdamState):
    """One bias-corrected Adam update, applied in place to ``params``."""
    if params.keys() != grads.keys():
        raise ShapeMismatch("parameter and gradient names differ")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for name, theta in params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ShapeMismatch(f"{name}: gradient {g.shape} vs parameter {theta.shape}")
        if name not in state.m:
            state.m[name] = np.zeros_like(theta)
            state.v[name] = np.zeros_like(theta)
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        theta -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state


@dataclass
class TrainConfig:
    batch_size: int = 32
    epochs: int = 100
    dropout: float | None = None  # None keeps the model's rate
    lr: float = 1e-3
    seed: int = 0
    clip_norm: float | None = None
    validation_fraction: float = 0.1

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.dropout is not None and not 0 <= self.dropout < 1:
            raise ValueError("dropout must lie in [0, 1)")
        if not 0 <= self.validation_fraction < 1:
            raise ValueError("validation_fraction must lie in [0, 1)")


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.train_loss)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss"]
        for k, (tr, va) in enumerate(zip(self.train_loss, self.val_loss), start=1):
            lines.append(f"{k},{tr!r},{'' if math.isnan(va) else repr(va)}")
        return "\n".join(lines) + "\n"


def clip_by_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def predict(model: LstmModel, inputs, batch_size: int = 512) -> np.ndarray:
    """Inference-mode predictions as a flat vector."""
    x = np.asarray(inputs, dtype=float)
    out = [forward(model, x[s:s + batch_size])[0][:, 0] for s in range(0, x.shape[0], batch_size)]
    return np.concatenate(out) if out else np.empty(0)


def train(model: LstmModel, data: SupervisedSet, cfg: TrainConfig) -> tuple[LstmModel, History]:
    """Mini-batch Adam training on a copy of ``model``.

    The last ``validation_fraction`` of ``data`` (chronologically) is held out
    for the per-epoch validation loss; the rest is reshuffled each epoch.
    Shuffling and dropout draw from generators seeded by ``cfg.seed``.
    """
    if len(data) == 0:
        raise EmptyData("no training samples")
    if data.seq_len != model.seq_len:
        raise ShapeMismatch(f"data seq_len {data.seq_len} != model seq_len {model.seq_len}")
    model = model.copy()
    if cfg.dropout is not None:
        model.dropout = float(cfg.dropout)
    history = History()
    if cfg.epochs == 0:
        return model, history

    n_val = int(math.floor(cfg.validation_fraction * len(data)))
    n_fit = len(data) - n_val
    if n_fit == 0:
        raise EmptyData("validation split leaves no training samples")
    fit_x, fit_y = data.inputs[:n_fit], data.targets[:n_fit]
    val_x, val_y = data.inputs[n_fit:], data.targets[n_fit:]

    shuffle_seq, dropout_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    dropout_rng = np.random.default_rng(dropout_seq)
    params = model.parameters()
    state = AdamState(lr=cfg.lr)

    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n_fit)
        total = 0.0
        for start in range(0, n_fit, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            pred, cache = forward(model, fit_x[idx], training=True, rng=dropout_rng)
            loss, dpred = mse_loss(pred, fit_y[idx])
            if not math.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss} at epoch {epoch + 1}, batch starting at sample {start}")
            grads = backward(model, cache, dpred)
            if cfg.clip_norm is not None:
                clip_by_global_norm(grads, cfg.clip_norm)
            adam_step(params, grads, state)
            total += loss * idx.size
        history.train_loss.append(total / n_fit)
        if n_val:
            val_loss, _ = mse_loss(predict(model, val_x), val_y)
            history.val_loss.append(val_loss)
        else:
            history.val_loss.append(math.nan)
    return model, history


def predict_horizon(model: LstmModel, seed_window, horizon: int) -> np.ndarray:
    """Closed-loop forecast: each prediction is fed back as the newest input."""
    window = np.asarray(seed_window, dtype=float).ravel()
    if window.size != model.seq_len:
        raise BadWindow(f"seed window has {window.size} values, model expects {model.seq_len}")
    if horizon < 1:
        raise ValueError("horizon must be positive")
    out = np.empty(horizon)
    for k in range(horizon):
        y = forward(model, window[None, :])[0][0, 0]
        out[k] = y
        window = np.append(window[1:], y)
    return out
