"""Sector-level CO2 emissions analysis and forecasting.

Ingest daily emissions, clean and smooth them, rank sectors by PCA, and
forecast each series with a stacked LSTM written directly in numpy.
"""

from .energy import BindingInput, CohesiveInput, Constituent, binding_energy, cohesive_energy
from .ingest import (
    DailySeries,
    EmissionDataset,
    EmissionRecord,
    FeatureMatrix,
    Sector,
    aggregate_total,
    filter_period,
    parse_emissions_csv,
    pivot_sector_matrix,
    read_emissions_csv,
    sector_series,
    to_canonical_csv,
)
from .lstm import (
    AdamState,
    LstmModel,
    TrainConfig,
    adam_step,
    backward,
    cell_forward,
    forward,
    init_model,
    mse_loss,
    predict,
    predict_horizon,
    train,
)
from .metrics import MetricsReport, evaluate
from .pca import PcaResult, covariance, eigen_symmetric, pca_fit, project
from .preprocess import (
    Scaler,
    SupervisedSet,
    clean_outliers,
    inverse_scale,
    make_supervised,
    minmax_scale,
    moving_average,
    train_test_split,
)

__version__ = "0.1.0"
