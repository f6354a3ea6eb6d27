"""Parsing, filtering and reshaping of daily sector-level emission records.

The canonical CSV layout is ``region,date,sector,value`` with ISO-8601 dates
and values in MtCO2/day. Carbon Monitor exports (``country,date,sector,value``
plus extra columns) are read as-is; extra columns are ignored.
"""

from __future__ import annotations

import csv
import io
import math
import os
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from enum import Enum
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateKey,
    EmptyInput,
    InvalidRange,
    MalformedRow,
    MissingColumn,
    RaggedDates,
    UnknownRegion,
    UnknownSector,
)

ISO_DATE = "%Y-%m-%d"


class Sector(str, Enum):
    """The five emission sectors, in their fixed column order."""

    POWER = "Power"
    INDUSTRY = "Industry"
    GROUND_TRANSPORT = "Ground Transport"
    DOMESTIC_AVIATION = "Domestic Aviation"
    INTERNATIONAL_AVIATION = "International Aviation"

    @property
    def rank(self) -> int:
        return _SECTOR_RANK[self]

    @property
    def slug(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, name: str) -> "Sector":
        """Case-insensitive lookup; spaces, underscores and hyphens are ignored."""
        try:
            return _SECTOR_LOOKUP[_normalize_name(name)]
        except KeyError:
            raise UnknownSector(name) from None


def _normalize_name(name: str) -> str:
    return re.sub(r"[\s_\-]+", "", name).lower()


SECTORS: tuple[Sector, ...] = tuple(Sector)
_SECTOR_RANK = {s: i for i, s in enumerate(SECTORS)}
_SECTOR_LOOKUP = {_normalize_name(s.value): s for s in SECTORS}
_SECTOR_LOOKUP.update({_normalize_name(s.name): s for s in SECTORS})


@dataclass(frozen=True, order=False)
class EmissionRecord:
    region: str
    sector: Sector
    date: date
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError(f"emission value must be finite and >= 0, got {self.value!r}")
        if not isinstance(self.sector, Sector):
            object.__setattr__(self, "sector", Sector.parse(str(self.sector)))

    @property
    def key(self) -> tuple[str, int, date]:
        return (self.region, self.sector.rank, self.date)


@dataclass(frozen=True)
class EmissionDataset:
    """Immutable, key-sorted collection of emission records."""

    records: tuple[EmissionRecord, ...]
    source: str = "<memory>"
    row_count: int = 0

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        for prev, cur in zip(records, records[1:]):
            if prev.key == cur.key:
                raise DuplicateKey(cur.region, cur.sector.value, cur.date)
            if prev.key > cur.key:
                raise ValueError("records must be sorted by (region, sector, date)")

    @classmethod
    def from_records(cls, records: Iterable[EmissionRecord], source: str = "<memory>") -> "EmissionDataset":
        recs = sorted(records, key=lambda r: r.key)
        return cls(tuple(recs), source=source, row_count=len(recs))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def regions(self) -> tuple[str, ...]:
        return tuple(sorted({r.region for r in self.records}))

    def sectors(self, region: str) -> tuple[Sector, ...]:
        present = {r.sector for r in self.records if r.region == region}
        if not present:
            raise UnknownRegion(region)
        return tuple(s for s in SECTORS if s in present)


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense days x features matrix with date rows and sector-name columns."""

    data: np.ndarray
    row_labels: tuple[date, ...]
    col_labels: tuple[str, ...]

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError("FeatureMatrix data must be 2-D")
        if data.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError(
                f"data shape {data.shape} does not match labels "
                f"({len(self.row_labels)}, {len(self.col_labels)})"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("FeatureMatrix entries must be finite")
        rows = tuple(self.row_labels)
        if any(b <= a for a, b in zip(rows, rows[1:])):
            raise ValueError("row labels must be strictly increasing")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", tuple(self.col_labels))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def column(self, label: str) -> np.ndarray:
        return self.data[:, self.col_labels.index(label)]


@dataclass(frozen=True)
class DailySeries:
    """A single dated series (one region/sector, or a regional total)."""

    dates: tuple[date, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.dates),):
            raise ValueError("dates and values must have the same length")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))

    def __len__(self) -> int:
        return len(self.dates)


_REGION_COLUMNS = ("region", "country")


def _resolve_header(header: Sequence[str]) -> dict[str, int]:
    norm = [h.strip().lstrip("﻿").lower() for h in header]
    idx = {}
    for name in ("date", "sector", "value"):
        if name not in norm:
            raise MissingColumn(f"header lacks a {name!r} column: {header!r}")
        idx[name] = norm.index(name)
    for name in _REGION_COLUMNS:
        if name in norm:
            idx["region"] = norm.index(name)
            break
    else:
        raise MissingColumn(f"header lacks a 'region'/'country' column: {header!r}")
    return idx


def parse_emissions_csv(
    source: IO[bytes] | IO[str] | bytes | str,
    date_format: str = ISO_DATE,
    *,
    source_name: str | None = None,
    skip_sectors: Iterable[str] = (),
) -> EmissionDataset:
    """Parse an emissions CSV into a validated, key-sorted dataset.

    Parameters
    ----------
    source
        Binary or text stream, or the raw CSV content as ``bytes``/``str``.
    date_format
        ``strptime`` format of the date column.
    skip_sectors
        Sector names the caller explicitly wants dropped (e.g. Carbon Monitor's
        ``Residential``). Any other unrecognised sector raises ``UnknownSector``.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    if source_name is None:
        source_name = getattr(source, "name", "<stream>") if not isinstance(source, (bytes, str)) else "<memory>"

    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None or not any(h.strip() for h in header):
        raise EmptyInput("CSV input is empty")
    cols = _resolve_header(header)
    width = max(cols.values()) + 1
    skipped = {_normalize_name(s) for s in skip_sectors}

    records = []
    seen: set[tuple] = set()
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < width:
            raise MalformedRow(line, f"expected at least {width} fields, got {len(row)}")
        sector_name = row[cols["sector"]].strip()
        if _normalize_name(sector_name) in skipped:
            continue
        sector = Sector.parse(sector_name)
        region = row[cols["region"]].strip()
        try:
            day = datetime.strptime(row[cols["date"]].strip(), date_format).date()
        except ValueError:
            raise MalformedRow(line, f"unparsable date {row[cols['date']]!r}") from None
        try:
            value = float(row[cols["value"]])
        except ValueError:
            raise MalformedRow(line, f"unparsable value {row[cols['value']]!r}") from None
        if not math.isfinite(value) or value < 0:
            raise MalformedRow(line, f"value must be finite and non-negative, got {value!r}")
        key = (region, sector, day)
        if key in seen:
            raise DuplicateKey(region, sector.value, day)
        seen.add(key)
        records.append(EmissionRecord(region, sector, day, value))

    if not records:
        raise EmptyInput("CSV input has a header but no data rows")
    return EmissionDataset.from_records(records, source=source_name)


def read_emissions_csv(path: str | os.PathLike, date_format: str = ISO_DATE, **kwargs) -> EmissionDataset:
    with open(path, "rb") as fh:
        return parse_emissions_csv(fh, date_format, source_name=os.fspath(path), **kwargs)


def to_canonical_csv(ds: EmissionDataset) -> str:
    """Serialise to the canonical CSV form (ISO dates, 6-decimal values)."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf)
    writer.writerow(["region", "date", "sector", "value"])
    for r in ds.records:
        writer.writerow([r.region, r.date.isoformat(), r.sector.value, f"{r.value:.6f}"])
    return buf.getvalue()


def filter_period(
    ds: EmissionDataset,
    start: date,
    end: date,
    excluded_years: Iterable[int] = frozenset(),
) -> EmissionDataset:
    """Keep records with ``start <= date <= end`` whose year is not excluded."""
    if start > end:
        raise InvalidRange(f"start {start} is after end {end}")
    excluded = frozenset(excluded_years)
    kept = tuple(
        r for r in ds.records if start <= r.date <= end and r.date.year not in excluded
    )
    return EmissionDataset(kept, source=ds.source, row_count=ds.row_count)


def _region_records(ds: EmissionDataset, region: str) -> list[EmissionRecord]:
    recs = [r for r in ds.records if r.region == region]
    if not recs:
        raise UnknownRegion(region)
    return recs


def pivot_sector_matrix(ds: EmissionDataset, region: str) -> FeatureMatrix:
    """One column per present sector (enum order), one row per date."""
    by_sector: dict[Sector, dict[date, float]] = {}
    for r in _region_records(ds, region):
        by_sector.setdefault(r.sector, {})[r.date] = r.value
    sectors = [s for s in SECTORS if s in by_sector]
    reference = set(by_sector[sectors[0]])
    for s in sectors[1:]:
        if set(by_sector[s]) != reference:
            raise RaggedDates(s.value)
    dates = sorted(reference)
    data = np.array([[by_sector[s][d] for s in sectors] for d in dates], dtype=float)
    return FeatureMatrix(data, tuple(dates), tuple(s.value for s in sectors))


def sector_series(ds: EmissionDataset, region: str, sector: Sector | str) -> DailySeries:
    sector = sector if isinstance(sector, Sector) else Sector.parse(sector)
    recs = [r for r in _region_records(ds, region) if r.sector is sector]
    if not recs:
        raise UnknownSector(f"{sector.value} (no records for region {region!r})")
    return DailySeries(tuple(r.date for r in recs), [r.value for r in recs])


def aggregate_total(ds: EmissionDataset, region: str) -> DailySeries:
    """Daily sum over all sectors of one region."""
    totals: dict[date, float] = {}
    for r in _region_records(ds, region):
        totals[r.date] = totals.get(r.date, 0.0) + r.value
    dates = sorted(totals)
    return DailySeries(tuple(dates), [totals[d] for d in dates])


def series_to_csv(series: DailySeries) -> str:
    """Two-column ``date,value`` export used for cleaned/smoothed series."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf)
    writer.writerow(["date", "value"])
    for d, v in zip(series.dates, series.values):
        writer.writerow([d.isoformat(), f"{v:.6f}"])
    return buf.getvalue()
