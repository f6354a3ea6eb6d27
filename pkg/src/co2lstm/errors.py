"""Exception hierarchy shared by every module.

Every error raised on purpose by the package derives from ``Co2LstmError`` so
the CLI can turn it into a machine-readable error payload.
"""

from __future__ import annotations


class Co2LstmError(Exception):
    """Base class for all package errors."""

    code = "error"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


# ingest

class EmptyInput(Co2LstmError):
    code = "empty_input"


class MissingColumn(Co2LstmError):
    code = "missing_column"


class MalformedRow(Co2LstmError):
    code = "malformed_row"

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason

    def to_dict(self) -> dict:
        return {**super().to_dict(), "line": self.line}


class DuplicateKey(Co2LstmError):
    code = "duplicate_key"

    def __init__(self, region: str, sector: str, date):
        super().__init__(f"duplicate record for ({region!r}, {sector}, {date})")
        self.key = (region, sector, date)


class UnknownSector(Co2LstmError):
    code = "unknown_sector"

    def __init__(self, name: str):
        super().__init__(f"unknown sector {name!r}")
        self.name = name


class UnknownRegion(Co2LstmError):
    code = "unknown_region"

    def __init__(self, region: str):
        super().__init__(f"region {region!r} not present in dataset")
        self.region = region


class InvalidRange(Co2LstmError):
    code = "invalid_range"


class RaggedDates(Co2LstmError):
    code = "ragged_dates"

    def __init__(self, sector: str):
        super().__init__(f"sector {sector} has a different date set from the other sectors")
        self.sector = sector


# preprocess

class WindowTooLarge(Co2LstmError):
    code = "window_too_large"


class SeriesTooShort(Co2LstmError):
    code = "series_too_short"


class DegenerateScaler(Co2LstmError):
    code = "degenerate_scaler"


class EmptyPartition(Co2LstmError):
    code = "empty_partition"


class DegenerateSeriesWarning(UserWarning):
    """Zero standard deviation; outlier cleaning returned the input unchanged."""


# pca

class TooFewRows(Co2LstmError):
    code = "too_few_rows"


class NotSymmetric(Co2LstmError):
    code = "not_symmetric"


class NoConvergence(Co2LstmError):
    code = "no_convergence"


class ZeroVariance(Co2LstmError):
    code = "zero_variance"


class KTooLarge(Co2LstmError):
    code = "k_too_large"


# lstm

class ShapeMismatch(Co2LstmError):
    code = "shape_mismatch"


class LengthMismatch(Co2LstmError):
    code = "length_mismatch"


class StaleCache(Co2LstmError):
    code = "stale_cache"


class EmptyData(Co2LstmError):
    code = "empty_data"


class NonFiniteLoss(Co2LstmError):
    code = "non_finite_loss"


class BadWindow(Co2LstmError):
    code = "bad_window"


class CheckpointError(Co2LstmError):
    code = "bad_checkpoint"


# metrics

class TooFewSamples(Co2LstmError):
    code = "too_few_samples"


# energy

class ZeroNormalization(Co2LstmError):
    code = "zero_normalization"


class AtomCountWarning(UserWarning):
    """Declared atom count disagrees with the sum of constituent counts."""


# cli

class ConfigError(Co2LstmError):
    code = "config_error"
