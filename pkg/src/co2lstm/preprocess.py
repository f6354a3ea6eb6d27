"""Cleaning and conditioning of daily series before PCA and LSTM training."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    DegenerateScaler,
    DegenerateSeriesWarning,
    EmptyPartition,
    SeriesTooShort,
    WindowTooLarge,
)
from .ingest import DailySeries


def _as_vector(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D series, got shape {x.shape}")
    return x


def zscores(series) -> np.ndarray:
    """Population z-scores (divisor n); a constant series scores all zeros."""
    x = _as_vector(series)
    sd = x.std()
    if sd == 0:
        return np.zeros_like(x)
    return (x - x.mean()) / sd


def clean_outliers(series, threshold: float = 3.0) -> tuple[np.ndarray, tuple[int, ...]]:
    """Replace points with ``|z| > threshold`` by the previous day's value.

    Z-scores are computed once, on the input. Flagged points are replaced left
    to right from the partially cleaned series, so a run of outliers collapses
    onto the last good value. A flagged first point takes the first unflagged
    value instead.

    Returns the cleaned copy and the sorted tuple of flagged indices.
    """
    x = _as_vector(series)
    if x.size < 2:
        raise SeriesTooShort("outlier cleaning needs at least 2 points")
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if x.std() == 0:
        warnings.warn("series has zero standard deviation; nothing cleaned", DegenerateSeriesWarning, stacklevel=2)
        return x.copy(), ()

    flagged = np.flatnonzero(np.abs(zscores(x)) > threshold)
    cleaned = x.copy()
    if flagged.size == 0:
        return cleaned, ()
    if flagged.size == x.size:
        raise ValueError("every point is flagged; lower the sensitivity (raise threshold)")
    flag_set = set(flagged.tolist())
    for i in flagged:
        if i == 0:
            first_good = next(j for j in range(x.size) if j not in flag_set)
            cleaned[0] = x[first_good]
        else:
            cleaned[i] = cleaned[i - 1]
    return cleaned, tuple(int(i) for i in flagged)


def moving_average(series, window: int = 7) -> np.ndarray:
    """Trailing moving average; ``out[k] = mean(series[k:k+window])``.

    The output has ``n - window + 1`` points, each belonging to the date of
    the last element of its window.
    """
    x = _as_vector(series)
    if window < 1:
        raise ValueError("window must be >= 1")
    if window > x.size:
        raise WindowTooLarge(f"window {window} exceeds series length {x.size}")
    if window == 1:
        return x.copy()
    view = sliding_window_view(x, window)
    # rounding in the mean must not leave the window's range
    return np.clip(view.mean(axis=1), view.min(axis=1), view.max(axis=1))


def smooth_series(series: DailySeries, window: int = 7) -> DailySeries:
    values = moving_average(series.values, window)
    return DailySeries(series.dates[window - 1:], values)


def clean_series(series: DailySeries, threshold: float = 3.0) -> tuple[DailySeries, tuple[int, ...]]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSeriesWarning)
        values, flagged = clean_outliers(series.values, threshold)
    return DailySeries(series.dates, values), flagged


@dataclass(frozen=True)
class Scaler:
    """Min-max scaler; ``degenerate`` when the fitted range is empty."""

    min: float
    max: float

    def __post_init__(self):
        if not self.max >= self.min:
            raise ValueError(f"scaler max {self.max} < min {self.min}")

    @property
    def degenerate(self) -> bool:
        return self.max == self.min

    @classmethod
    def fit(cls, series) -> "Scaler":
        x = _as_vector(series)
        if x.size == 0 or not np.all(np.isfinite(x)):
            raise ValueError("scaler needs a nonempty finite series")
        return cls(float(x.min()), float(x.max()))

    def transform(self, series) -> np.ndarray:
        x = _as_vector(series)
        if self.degenerate:
            return np.full_like(x, 0.5)
        return (x - self.min) / (self.max - self.min)

    def inverse(self, scaled) -> np.ndarray:
        return inverse_scale(scaled, self)

    def to_dict(self) -> dict:
        return {"min": self.min, "max": self.max}


def minmax_scale(series) -> tuple[np.ndarray, Scaler]:
    scaler = Scaler.fit(series)
    return scaler.transform(series), scaler


def inverse_scale(scaled, scaler: Scaler) -> np.ndarray:
    if scaler.degenerate:
        raise DegenerateScaler(f"cannot invert a degenerate scaler (min = max = {scaler.min})")
    return _as_vector(scaled) * (scaler.max - scaler.min) + scaler.min


@dataclass(frozen=True)
class SupervisedSet:
    """Sliding windows: ``inputs[k]`` is the ``seq_len`` values before ``targets[k]``."""

    inputs: np.ndarray
    targets: np.ndarray
    seq_len: int

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.inputs.shape[1] != self.seq_len:
            raise ValueError(f"inputs must be (n, {self.seq_len}), got {self.inputs.shape}")
        if self.targets.shape != (self.inputs.shape[0],):
            raise ValueError("targets must be a vector with one entry per window")

    def __len__(self) -> int:
        return self.targets.shape[0]

    def slice(self, start: int, stop: int) -> "SupervisedSet":
        return SupervisedSet(self.inputs[start:stop], self.targets[start:stop], self.seq_len)


def make_supervised(series, seq_len: int = 30) -> SupervisedSet:
    x = _as_vector(series)
    if seq_len < 1:
        raise ValueError("seq_len must be positive")
    if x.size < seq_len + 1:
        raise SeriesTooShort(f"need at least {seq_len + 1} points for seq_len={seq_len}, got {x.size}")
    inputs = sliding_window_view(x, seq_len)[:-1].copy()
    return SupervisedSet(inputs, x[seq_len:].copy(), seq_len)


def train_test_split(data: SupervisedSet, train_fraction: float = 0.8) -> tuple[SupervisedSet, SupervisedSet]:
    """Chronological split, no shuffling."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(data)
    n_train = int(np.floor(train_fraction * n))
    if n_train == 0 or n_train == n:
        raise EmptyPartition(f"split of {n} samples at {train_fraction} leaves an empty partition")
    return data.slice(0, n_train), data.slice(n_train, n)


@dataclass(frozen=True)
class PreparedSeries:
    """A smoothed series scaled and windowed for one training run."""

    train: SupervisedSet
    test: SupervisedSet
    scaler: Scaler
    scaled: np.ndarray
    dates: tuple


def prepare_series(series: DailySeries, seq_len: int = 30, train_fraction: float = 0.8) -> PreparedSeries:
    """Scale with a scaler fit on the training span only, then window and split.

    The training span is every series value that appears in a training window
    or target: ``series[: n_train + seq_len]``.
    """
    n_samples = len(series) - seq_len
    if n_samples < 2:
        raise SeriesTooShort(f"series of length {len(series)} is too short for seq_len={seq_len}")
    n_train = int(np.floor(train_fraction * n_samples))
    if n_train == 0 or n_train == n_samples:
        raise EmptyPartition(f"split of {n_samples} samples at {train_fraction} leaves an empty partition")
    scaler = Scaler.fit(series.values[: n_train + seq_len])
    if scaler.degenerate:
        raise DegenerateScaler("training span is constant; nothing to learn")
    scaled = scaler.transform(series.values)
    train, test = train_test_split(make_supervised(scaled, seq_len), train_fraction)
    return PreparedSeries(train, test, scaler, scaled, series.dates)
