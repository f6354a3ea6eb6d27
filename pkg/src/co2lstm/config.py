"""Pipeline configuration: one INI-style file plus ``key=value`` overrides.

Grammar (read with :mod:`configparser`, no interpolation)::

    [pipeline]
    data = emissions.csv          ; relative paths resolve against the file
    regions = EU27 & UK, India    ; comma separated, empty = every region
    sectors = Power, Industry, Ground Transport
    start = 2019-01-01
    end = 2023-02-28
    excluded_years = 2020
    epochs = 100
    ...

    [India / Power]               ; per-(region, sector) overrides
    batch_size = 8
    dropout = 0.1

Only ``batch_size``, ``dropout``, ``epochs``, ``lr`` and ``seed`` may be
overridden per pair. Command-line overrides win over the file.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import date

from .errors import ConfigError, UnknownSector
from .ingest import ISO_DATE, Sector
from .lstm import TrainConfig

OVERRIDABLE = ("batch_size", "dropout", "epochs", "lr", "seed")
PCA_MODES = ("raw", "cleaned", "scaled", "cleaned_scaled")


@dataclass(frozen=True)
class PipelineConfig:
    data: str = ""
    date_format: str = ISO_DATE
    regions: tuple[str, ...] = ()
    sectors: tuple[str, ...] = ("Power", "Industry", "Ground Transport")
    skip_sectors: tuple[str, ...] = ()
    start: date = date(2019, 1, 1)
    end: date = date(2023, 2, 28)
    excluded_years: tuple[int, ...] = (2020,)
    zscore_threshold: float = 3.0
    ma_window: int = 7
    seq_len: int = 30
    train_fraction: float = 0.8
    validation_fraction: float = 0.1
    layers: tuple[int, ...] = (50, 50, 50)
    batch_size: int = 32
    dropout: float = 0.16
    epochs: int = 100
    lr: float = 1e-3
    seed: int = 0
    clip_norm: float | None = None
    horizon: int = 30
    pca_mode: str = "cleaned_scaled"
    pca_k: int = 3
    jobs: int = 1
    energy_input: str = ""
    overrides: dict = field(default_factory=dict)  # (region, sector value) -> {key: value}

    def __post_init__(self):
        if self.pca_mode not in PCA_MODES:
            raise ConfigError(f"pca_mode must be one of {PCA_MODES}, got {self.pca_mode!r}")
        if self.start > self.end:
            raise ConfigError(f"start {self.start} is after end {self.end}")
        for name in ("ma_window", "seq_len", "horizon", "pca_k", "jobs", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if not self.zscore_threshold > 0:
            raise ConfigError("zscore_threshold must be positive")
        if not self.layers:
            raise ConfigError("layers must list at least one layer size")
        try:
            self.sector_enums
        except UnknownSector as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def sector_enums(self) -> tuple[Sector, ...]:
        return tuple(Sector.parse(s) for s in self.sectors)

    def train_config(self, region: str, sector: Sector) -> TrainConfig:
        base = {
            "batch_size": self.batch_size,
            "dropout": self.dropout,
            "epochs": self.epochs,
            "lr": self.lr,
            "seed": self.seed,
        }
        base.update(self.overrides.get((region, sector.value), {}))
        return TrainConfig(
            clip_norm=self.clip_norm,
            validation_fraction=self.validation_fraction,
            **base,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["start"] = self.start.isoformat()
        d["end"] = self.end.isoformat()
        d["overrides"] = {f"{r} / {s}": dict(sorted(v.items())) for (r, s), v in sorted(self.overrides.items())}
        for key in ("regions", "sectors", "skip_sectors", "excluded_years", "layers"):
            d[key] = list(d[key])
        return d

    def hash(self) -> str:
        """sha256 of the canonical JSON form; ``jobs`` is left out since it cannot change results."""
        d = self.to_dict()
        del d["jobs"]
        payload = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def check_overrides(self, pairs) -> None:
        """Every override section must name a selected (region, sector) pair."""
        present = {(r, s.value) for r, s in pairs}
        for key in self.overrides:
            if key not in present:
                raise ConfigError(f"override [{key[0]} / {key[1]}] does not match any selected region/sector")


def _split(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _convert(name: str, raw: str):
    raw = raw.strip()
    if name in ("regions", "sectors", "skip_sectors"):
        return _split(raw)
    if name == "excluded_years":
        return tuple(int(v) for v in _split(raw))
    if name == "layers":
        return tuple(int(v) for v in _split(raw))
    if name in ("start", "end"):
        return date.fromisoformat(raw)
    if name == "clip_norm":
        return float(raw) if raw and raw.lower() != "none" else None
    if name in ("ma_window", "seq_len", "batch_size", "epochs", "seed", "horizon", "pca_k", "jobs"):
        return int(raw)
    if name in ("zscore_threshold", "train_fraction", "validation_fraction", "dropout", "lr"):
        return float(raw)
    return raw


_FIELDS = {f.name for f in fields(PipelineConfig)} - {"overrides"}


def _parse_pair(section: str) -> tuple[str, str]:
    region, sep, sector = section.rpartition("/")
    if not sep or not region.strip():
        raise ConfigError(f"override section [{section}] must look like [Region / Sector]")
    try:
        return region.strip(), Sector.parse(sector.strip()).value
    except UnknownSector as exc:
        raise ConfigError(f"override section [{section}]: {exc}") from exc


def load_config(path: str | os.PathLike | None = None, overrides=()) -> PipelineConfig:
    """Read a config file (optional) and apply ``key=value`` overrides.

    Override keys of the form ``Region / Sector.key`` target one pair.
    """
    values: dict = {}
    pair_overrides: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        base_dir = os.path.dirname(os.path.abspath(path))
        for section in parser.sections():
            items = dict(parser.items(section))
            if section == "pipeline":
                for key, raw in items.items():
                    _set(values, key, raw)
                for key in ("data", "energy_input"):
                    if values.get(key) and not os.path.isabs(values[key]):
                        values[key] = os.path.normpath(os.path.join(base_dir, values[key]))
            else:
                pair = _parse_pair(section)
                for key, raw in items.items():
                    _set_pair(pair_overrides, pair, key, raw)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} must be key=value")
        key = key.strip()
        if "." in key and "/" in key:
            section, _, sub = key.rpartition(".")
            _set_pair(pair_overrides, _parse_pair(section), sub, raw)
        else:
            _set(values, key, raw)
    values["overrides"] = pair_overrides
    return PipelineConfig(**values)


def _set(values: dict, key: str, raw: str) -> None:
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        values[key] = _convert(key, raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc


def _set_pair(store: dict, pair: tuple[str, str], key: str, raw: str) -> None:
    if key not in OVERRIDABLE:
        raise ConfigError(f"{key!r} cannot be overridden per region/sector (allowed: {', '.join(OVERRIDABLE)})")
    try:
        store.setdefault(pair, {})[key] = _convert(key, raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc


def with_data(cfg: PipelineConfig, data: str) -> PipelineConfig:
    return replace(cfg, data=data)
