"""JSON model checkpoints (versioned, float64 values round-trip exactly)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CheckpointError
from .lstm import LstmLayerParams, LstmModel
from .preprocess import Scaler

FORMAT = "co2lstm-checkpoint"
VERSION = 1


@dataclass
class Checkpoint:
    model: LstmModel
    scaler: Scaler | None = None
    config: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def checkpoint_to_dict(ck: Checkpoint) -> dict:
    m = ck.model
    return {
        "format": FORMAT,
        "version": VERSION,
        "seq_len": m.seq_len,
        "dropout": m.dropout,
        "layers": [
            {
                "input_size": layer.input_size,
                "hidden": layer.hidden,
                "W": layer.W.ravel().tolist(),
                "U": layer.U.ravel().tolist(),
                "b": layer.b.tolist(),
            }
            for layer in m.layers
        ],
        "head": {"w": m.head_w.tolist(), "b": m.head_b.tolist()},
        "scaler": None if ck.scaler is None else ck.scaler.to_dict(),
        "config": ck.config,
        "meta": ck.meta,
    }


def checkpoint_from_dict(doc: dict) -> Checkpoint:
    if doc.get("format") != FORMAT:
        raise CheckpointError(f"not a checkpoint (format={doc.get('format')!r})")
    if doc.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {doc.get('version')!r}")
    try:
        layers = []
        for spec in doc["layers"]:
            n_in, h = int(spec["input_size"]), int(spec["hidden"])
            layers.append(LstmLayerParams(
                np.array(spec["W"], dtype=float).reshape(4 * h, n_in),
                np.array(spec["U"], dtype=float).reshape(4 * h, h),
                np.array(spec["b"], dtype=float),
            ))
        model = LstmModel(
            layers,
            np.array(doc["head"]["w"], dtype=float),
            np.array(doc["head"]["b"], dtype=float),
            float(doc["dropout"]),
            int(doc["seq_len"]),
        )
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"corrupt checkpoint: {exc}") from exc
    scaler = None if doc.get("scaler") is None else Scaler(doc["scaler"]["min"], doc["scaler"]["max"])
    return Checkpoint(model, scaler, doc.get("config", {}), doc.get("meta", {}))


def save_checkpoint(path, ck: Checkpoint) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(checkpoint_to_dict(ck), fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> Checkpoint:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"{path}: {exc}") from exc
    return checkpoint_from_dict(doc)
