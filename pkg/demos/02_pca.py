"""
Which sectors carry the variance
================================

PCA on one region's sector matrix, with a Jacobi eigensolver underneath.
"""

import numpy as np

from co2lstm import FeatureMatrix, eigen_symmetric, filter_period, pca_fit, pivot_sector_matrix, project, read_emissions_csv
from co2lstm.preprocess import Scaler, clean_outliers
from co2lstm.synthetic import bundled_fixture_path

ds = read_emissions_csv(bundled_fixture_path())
ds = filter_period(ds, ds.records[0].date, ds.records[-1].date, excluded_years={2020})
m = pivot_sector_matrix(ds, "Southland")

###############################################################################
# The eigensolver on its own: a 2x2 case small enough to check by hand.

vals, vecs = eigen_symmetric(np.array([[2.0, 1.0], [1.0, 2.0]]))
print("eigenvalues", vals)
print("eigenvectors\n", vecs)

###############################################################################
# Raw data: the biggest sector dominates simply because its numbers are largest.

raw = pca_fit(m)
for j, ratio in enumerate(raw.explained_ratio):
    print(f"raw     {ratio:8.5f}  {raw.sector_attribution[j]}")

###############################################################################
# Cleaned and min-max scaled per column, as the pipeline does by default.
# Now every sector competes on shape rather than size.

data = np.column_stack([
    Scaler.fit(c).transform(c) for c in (clean_outliers(col)[0] for col in m.data.T)
])
scaled = pca_fit(FeatureMatrix(data, m.row_labels, m.col_labels))
for j, ratio in enumerate(scaled.explained_ratio):
    print(f"scaled  {ratio:8.5f}  {scaled.sector_attribution[j]}")

###############################################################################
# Scores on the first three components.

scores = project(scaled, data, 3)
print(scores.shape, scores.var(axis=0), scaled.eigenvalues[:3])
