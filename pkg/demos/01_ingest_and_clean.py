"""
Loading and cleaning daily sector emissions
===========================================

Read the bundled synthetic emissions file, drop 2020, then replace spikes
and smooth one series the way the forecasting pipeline does.
"""

from datetime import date

import numpy as np

from co2lstm import (
    clean_outliers,
    filter_period,
    moving_average,
    pivot_sector_matrix,
    read_emissions_csv,
    sector_series,
)
from co2lstm.ingest import Sector
from co2lstm.synthetic import bundled_fixture_path

###############################################################################
# The fixture uses the canonical layout: region, ISO date, sector, value.

ds = read_emissions_csv(bundled_fixture_path())
print(len(ds), "records for", ds.regions)

###############################################################################
# Keep 2019-01-01..2023-02-28 but leave out the pandemic year.

ds = filter_period(ds, date(2019, 1, 1), date(2023, 2, 28), excluded_years={2020})
print(len(ds), "records after filtering")

###############################################################################
# One region as a (days x sectors) matrix. Columns follow the fixed sector order.

m = pivot_sector_matrix(ds, "Northland")
print(m.data.shape, m.col_labels)

###############################################################################
# Spikes more than 3 population SDs from the mean take the previous day's value.

for sector in Sector:
    s = sector_series(ds, "Northland", sector)
    _, flagged = clean_outliers(s.values, threshold=3.0)
    print(f"{sector.value:<24}", [s.dates[i].isoformat() for i in flagged])

power = sector_series(ds, "Northland", Sector.POWER)
cleaned, _ = clean_outliers(power.values)

###############################################################################
# A trailing 7-day mean; the first 6 days have no full window and are dropped.

smooth = moving_average(cleaned, 7)
print(f"{len(power)} raw days -> {len(smooth)} smoothed, "
      f"sd {np.std(cleaned):.3f} -> {np.std(smooth):.3f}")
