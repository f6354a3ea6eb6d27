"""End-to-end steps shared by the CLI and the demo scripts.

Each function is pure with respect to the filesystem except the ``write_*``
helpers, which only ever write below the given output directory.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import timedelta

import numpy as np

from . import svg
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import PipelineConfig
from .errors import CheckpointError
from .ingest import (
    DailySeries,
    EmissionDataset,
    FeatureMatrix,
    Sector,
    filter_period,
    pivot_sector_matrix,
    read_emissions_csv,
    sector_series,
    series_to_csv,
)
from .lstm import History, init_model, predict, predict_horizon, train
from .metrics import evaluate
from .pca import PcaResult, pca_fit
from .preprocess import PreparedSeries, Scaler, clean_outliers, moving_average, prepare_series

log = logging.getLogger(__name__)


def slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def pair_name(region: str, sector: Sector) -> str:
    return f"{slug(region)}__{sector.slug}"


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def load_dataset(cfg: PipelineConfig) -> EmissionDataset:
    if not cfg.data:
        raise FileNotFoundError("no data file configured (set `data` or pass --data)")
    ds = read_emissions_csv(cfg.data, cfg.date_format, skip_sectors=cfg.skip_sectors)
    return filter_period(ds, cfg.start, cfg.end, cfg.excluded_years)


def selected_regions(cfg: PipelineConfig, ds: EmissionDataset) -> tuple[str, ...]:
    if cfg.regions:
        for r in cfg.regions:
            ds.sectors(r)  # raises UnknownRegion
        return cfg.regions
    return ds.regions


def selected_pairs(cfg: PipelineConfig, ds: EmissionDataset) -> list[tuple[str, Sector]]:
    pairs = []
    for region in selected_regions(cfg, ds):
        present = set(ds.sectors(region))
        for sector in cfg.sector_enums:
            if sector in present:
                pairs.append((region, sector))
            else:
                log.warning("no %s records for %s; skipped", sector.value, region)
    cfg.check_overrides(pairs)
    return pairs


@dataclass(frozen=True)
class CleanedSeries:
    raw: DailySeries
    cleaned: DailySeries
    smoothed: DailySeries
    flagged: tuple[int, ...]


def clean_pair(ds: EmissionDataset, region: str, sector: Sector, cfg: PipelineConfig) -> CleanedSeries:
    """Outlier replacement, then the trailing moving average."""
    raw = sector_series(ds, region, sector)
    values, flagged = clean_outliers(raw.values, cfg.zscore_threshold)
    cleaned = DailySeries(raw.dates, values)
    smoothed = DailySeries(raw.dates[cfg.ma_window - 1:], moving_average(values, cfg.ma_window))
    return CleanedSeries(raw, cleaned, smoothed, flagged)


def pca_matrix(ds: EmissionDataset, region: str, cfg: PipelineConfig) -> FeatureMatrix:
    """Feature matrix for one region's PCA, conditioned according to ``cfg.pca_mode``."""
    m = pivot_sector_matrix(ds, region)
    data = np.array(m.data)
    if cfg.pca_mode in ("cleaned", "cleaned_scaled"):
        for j in range(data.shape[1]):
            data[:, j] = clean_outliers(data[:, j], cfg.zscore_threshold)[0]
    if cfg.pca_mode in ("scaled", "cleaned_scaled"):
        for j in range(data.shape[1]):
            data[:, j] = Scaler.fit(data[:, j]).transform(data[:, j])
    return FeatureMatrix(data, m.row_labels, m.col_labels)


def run_pca(ds: EmissionDataset, region: str, cfg: PipelineConfig) -> PcaResult:
    return pca_fit(pca_matrix(ds, region, cfg))


@dataclass
class TrainResult:
    region: str
    sector: Sector
    checkpoint: Checkpoint
    history: History
    prepared: PreparedSeries


def train_pair(ds: EmissionDataset, region: str, sector: Sector, cfg: PipelineConfig) -> TrainResult:
    series = clean_pair(ds, region, sector, cfg).smoothed
    prepared = prepare_series(series, cfg.seq_len, cfg.train_fraction)
    tcfg = cfg.train_config(region, sector)
    model = init_model(cfg.layers, cfg.seq_len, tcfg.dropout or 0.0, tcfg.seed)
    log.info("training %s / %s: %d samples, %s", region, sector.value, len(prepared.train), tcfg)
    model, history = train(model, prepared.train, tcfg)
    ck = Checkpoint(
        model,
        prepared.scaler,
        config={
            "region": region,
            "sector": sector.value,
            "train": {k: getattr(tcfg, k) for k in ("batch_size", "dropout", "epochs", "lr", "seed",
                                                    "clip_norm", "validation_fraction")},
            "layers": list(cfg.layers),
            "seq_len": cfg.seq_len,
            "train_fraction": cfg.train_fraction,
        },
        meta={"config_hash": cfg.hash(), "seed": tcfg.seed},
    )
    return TrainResult(region, sector, ck, history, prepared)


def _train_job(args):
    ds, region, sector, cfg = args
    return train_pair(ds, region, sector, cfg)


def train_all(ds: EmissionDataset, pairs, cfg: PipelineConfig) -> list[TrainResult]:
    jobs = [(ds, r, s, cfg) for r, s in pairs]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_train_job, jobs))
    return [_train_job(j) for j in jobs]


def evaluate_prepared(ck: Checkpoint, prepared: PreparedSeries) -> dict:
    """Test-set metrics in scaled and original units plus the dated predictions."""
    pred = predict(ck.model, prepared.test.inputs)
    actual = prepared.test.targets
    scaler = prepared.scaler
    first = len(prepared.dates) - len(actual)
    return {
        "scaled": evaluate(actual, pred, units="scaled"),
        "original": evaluate(scaler.inverse(actual), scaler.inverse(pred), units="original"),
        "dates": prepared.dates[first:],
        "actual": actual,
        "predicted": pred,
    }


def forecast(ck: Checkpoint, smoothed: DailySeries, horizon: int) -> tuple[list, np.ndarray, np.ndarray]:
    """Closed-loop forecast after the last smoothed value; returns dates, scaled and original values."""
    if ck.scaler is None:
        raise CheckpointError("checkpoint carries no scaler; cannot forecast in original units")
    window = ck.scaler.transform(smoothed.values[-ck.model.seq_len:])
    scaled = predict_horizon(ck.model, window, horizon)
    last = smoothed.dates[-1]
    dates = [last + timedelta(days=k) for k in range(1, horizon + 1)]
    return dates, scaled, ck.scaler.inverse(scaled)


# writers ---------------------------------------------------------------

def _write(path: str, text: str) -> str:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def write_json(path: str, obj) -> str:
    return _write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_text(path: str, text: str) -> str:
    return _write(path, text)


def write_clean(out: str, region: str, sector: Sector, cs: CleanedSeries) -> list[str]:
    base = os.path.join(out, "clean", pair_name(region, sector))
    return [
        write_text(base + ".cleaned.csv", series_to_csv(cs.cleaned)),
        write_text(base + ".smoothed.csv", series_to_csv(cs.smoothed)),
    ]


def checkpoint_path(out: str, region: str, sector: Sector) -> str:
    return os.path.join(out, "train", pair_name(region, sector) + ".checkpoint.json")


def write_train(out: str, res: TrainResult, meta: dict) -> list[str]:
    base = os.path.join(out, "train", pair_name(res.region, res.sector))
    path = checkpoint_path(out, res.region, res.sector)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    save_checkpoint(path, res.checkpoint)
    epochs = list(range(1, len(res.history) + 1))
    plot = {"train": (epochs, res.history.train_loss)}
    if res.history.val_loss and not np.isnan(res.history.val_loss).any():
        plot["validation"] = (epochs, res.history.val_loss)
    return [
        path,
        write_text(base + ".history.csv", res.history.to_csv()),
        write_text(base + ".loss.svg", svg.line_chart(plot, f"Loss: {res.region} / {res.sector.value}", meta)),
    ]


def read_checkpoint_for(out: str, region: str, sector: Sector) -> Checkpoint:
    path = checkpoint_path(out, region, sector)
    if not os.path.exists(path):
        raise CheckpointError(f"missing checkpoint {path}; run `train` first")
    return load_checkpoint(path)
