"""Deterministic synthetic emissions in the canonical CSV layout.

Used for the bundled fixture (``co2lstm/data/synthetic_emissions.csv``), demos
and end-to-end tests; real Carbon Monitor extracts are not redistributed.
Each sector is a level with a weekly cycle, an annual cycle, a slow trend,
Gaussian noise and a handful of one-day spikes; 2020 is depressed to mimic the
pandemic dip.
"""

from __future__ import annotations

from datetime import date, timedelta
from importlib import resources

import numpy as np

from .ingest import SECTORS, EmissionDataset, EmissionRecord, Sector, to_canonical_csv

# level (Mt/day), weekly amp, annual amp, trend per year, noise sd (fractions of level)
_PROFILE = {
    Sector.POWER: (4.0, 0.04, 0.12, 0.010, 0.020),
    Sector.INDUSTRY: (3.0, 0.06, 0.03, 0.015, 0.015),
    Sector.GROUND_TRANSPORT: (1.5, 0.10, 0.05, 0.008, 0.020),
    Sector.DOMESTIC_AVIATION: (0.05, 0.05, 0.10, 0.020, 0.030),
    Sector.INTERNATIONAL_AVIATION: (0.25, 0.03, 0.15, 0.020, 0.030),
}

DEFAULT_REGIONS = ("Northland", "Southland")
START = date(2019, 1, 1)
END = date(2023, 2, 28)


def synthetic_dataset(
    regions=DEFAULT_REGIONS,
    start: date = START,
    end: date = END,
    seed: int = 2023,
    spikes_per_series: int = 4,
) -> EmissionDataset:
    rng = np.random.default_rng(seed)
    n_days = (end - start).days + 1
    days = [start + timedelta(days=k) for k in range(n_days)]
    t = np.arange(n_days, dtype=float)
    weekday = np.array([d.weekday() for d in days])
    covid = np.array([0.85 if d.year == 2020 else 1.0 for d in days])
    records = []
    for r_idx, region in enumerate(regions):
        region_scale = 1.0 + 0.5 * r_idx
        for sector in SECTORS:
            level, wk, yr, trend, noise = _PROFILE[sector]
            phase = rng.uniform(0, 2 * np.pi)
            base = level * region_scale * (
                1.0
                + trend * t / 365.25
                + yr * np.sin(2 * np.pi * t / 365.25 + phase)
                - wk * (weekday >= 5)
            )
            values = base * covid * (1.0 + noise * rng.standard_normal(n_days))
            spikes = rng.choice(n_days, size=spikes_per_series, replace=False)
            values[spikes] *= rng.uniform(1.6, 2.2, size=spikes_per_series)
            values = np.round(np.clip(values, 0.0, None), 6)
            records.extend(EmissionRecord(region, sector, d, float(v)) for d, v in zip(days, values))
    return EmissionDataset.from_records(records, source="synthetic")


def synthetic_csv(**kwargs) -> str:
    return to_canonical_csv(synthetic_dataset(**kwargs))


def bundled_fixture_path():
    """Path of the packaged synthetic CSV."""
    return resources.files("co2lstm").joinpath("data/synthetic_emissions.csv")


def bundled_config_path():
    return resources.files("co2lstm").joinpath("data/synthetic.cfg")
