"""Regression metrics for forecast evaluation: MSE, RMSE, MAE and R^2."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import LengthMismatch, TooFewSamples


@dataclass(frozen=True)
class MetricsReport:
    mse: float
    rmse: float
    mae: float
    r2: float
    n: int
    units: str = "scaled"
    degenerate_variance: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        # JSON has no NaN
        if math.isnan(out["r2"]):
            out["r2"] = None
        return out


def evaluate(actual, predicted, units: str = "scaled") -> MetricsReport:
    """Compare predictions with observations.

    R^2 is reported as computed and may be negative for forecasts worse than
    the mean. When the actual values are constant, R^2 is undefined and the
    report carries ``r2 = nan`` with ``degenerate_variance = True``.
    """
    y_a = np.asarray(actual, dtype=float).ravel()
    y_p = np.asarray(predicted, dtype=float).ravel()
    if y_a.shape != y_p.shape:
        raise LengthMismatch(f"actual has {y_a.size} values, predicted has {y_p.size}")
    n = y_a.size
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    if not (np.all(np.isfinite(y_a)) and np.all(np.isfinite(y_p))):
        raise ValueError("metrics need finite inputs")

    resid = y_a - y_p
    ss_r = float(np.sum(resid * resid))
    mse = ss_r / n
    mae = float(np.sum(np.abs(resid))) / n
    ss_t = float(np.sum((y_a - y_a.mean()) ** 2))
    if ss_t == 0:
        r2, degenerate = math.nan, True
    else:
        r2, degenerate = 1.0 - ss_r / ss_t, False
    return MetricsReport(mse, math.sqrt(mse), mae, r2, n, units, degenerate)
