"""CSV ingestion, cumulative-to-daily differencing and per-capita scaling."""

from __future__ import annotations

import csv
import datetime as _dt
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import DataError, DuplicateDateError, GapError, IngestError, InvalidParameterError
from .series import TimeSeries

log = logging.getLogger(__name__)

GapPolicy = Literal["reject", "zero-fill"]

# April 1, 2020 decennial census resident population of the United States
US_POPULATION_2020 = 331_449_281


@dataclass(frozen=True)
class IngestConfig:
    input_path: str | Path
    date_column: str = "date"
    value_column: str = "value"
    cumulative: bool = False
    population: float | None = None
    per: float = 100_000
    gap_policy: GapPolicy = "reject"

    def __post_init__(self):
        if self.population is not None and not self.population > 0:
            raise InvalidParameterError(f"population must be positive, got {self.population!r}")
        if not self.per > 0:
            raise InvalidParameterError(f"per must be positive, got {self.per!r}")
        if self.gap_policy not in ("reject", "zero-fill"):
            raise InvalidParameterError(f"gap policy must be 'reject' or 'zero-fill', got {self.gap_policy!r}")


def read_csv(cfg: IngestConfig) -> TimeSeries:
    """Parse a dated CSV into a daily series (no differencing or scaling)."""
    path = Path(cfg.input_path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("empty file, header row required", row=1) from None
        except csv.Error as exc:
            raise IngestError(f"malformed CSV: {exc}", row=1) from exc
        header = [h.strip() for h in header]
        for col in (cfg.date_column, cfg.value_column):
            if col not in header:
                raise IngestError(f"column {col!r} not found in header {header}", row=1)
        di, vi = header.index(cfg.date_column), header.index(cfg.value_column)
        rows: dict[_dt.date, tuple[float, int]] = {}
        try:
            for record in reader:
                line = reader.line_num
                if not record or all(not f.strip() for f in record):
                    continue
                if len(record) != len(header):
                    raise IngestError(f"expected {len(header)} fields, found {len(record)}", row=line)
                try:
                    day = _dt.date.fromisoformat(record[di].strip())
                except ValueError:
                    raise IngestError(f"unparseable date {record[di]!r}", row=line) from None
                try:
                    value = float(record[vi])
                except ValueError:
                    raise IngestError(f"unparseable value {record[vi]!r}", row=line) from None
                if not np.isfinite(value):
                    raise IngestError(f"non-finite value {record[vi]!r}", row=line)
                if day in rows:
                    raise DuplicateDateError(f"duplicate date {day} (first seen on row {rows[day][1]})", row=line)
                rows[day] = (value, line)
        except csv.Error as exc:
            raise IngestError(f"malformed CSV: {exc}", row=reader.line_num) from exc
    if not rows:
        raise IngestError("no data rows", row=2)

    days = sorted(rows)
    start, end = days[0], days[-1]
    n = (end - start).days + 1
    values = np.zeros(n)
    present = np.zeros(n, dtype=bool)
    for day in days:
        i = (day - start).days
        values[i] = rows[day][0]
        present[i] = True
    if not present.all():
        missing = start + _dt.timedelta(days=int(np.flatnonzero(~present)[0]))
        if cfg.gap_policy == "reject":
            raise GapError(f"missing date {missing} (gap policy 'reject')")
        log.warning("zero-filled %d missing dates, first %s", int((~present).sum()), missing)
    return TimeSeries(values, 0, start)


def cumulative_to_incident(series: TimeSeries) -> TimeSeries:
    """First differences with the first sample kept as is.

    Negative increments (reporting corrections) are preserved and logged.
    """
    x = series.values
    out = np.empty_like(x)
    out[0] = x[0]
    out[1:] = np.diff(x)
    neg = int(np.sum(out[1:] < 0))
    if neg:
        log.warning("%d negative daily increments preserved (reporting corrections)", neg)
    return series.with_values(out)


def normalize_per_capita(series: TimeSeries, population: float, per: float = 100_000) -> TimeSeries:
    """Scale counts to a rate per ``per`` persons."""
    if not population > 0:
        raise InvalidParameterError(f"population must be positive, got {population!r}")
    if not per > 0:
        raise InvalidParameterError(f"per must be positive, got {per!r}")
    return series.with_values(series.values * (per / population))


def load_csv(cfg: IngestConfig) -> TimeSeries:
    """Read, optionally difference, and optionally rescale per capita."""
    series = read_csv(cfg)
    if cfg.cumulative:
        series = cumulative_to_incident(series)
    if cfg.population is not None:
        series = normalize_per_capita(series, cfg.population, cfg.per)
    return series
