"""Core value types: sampled series, periodic components and CI bands."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import BoundsError, DataError, InvalidParameterError, InvalidPeriodError, NonFiniteError

Method = Literal["PBB", "VBPBB"]


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A regularly sampled real series.

    ``origin_index`` is the absolute sample index of ``values[0]``; it is 0
    for freshly ingested data and grows when leading samples are trimmed,
    so phases computed from it survive trimming.
    """

    values: np.ndarray
    origin_index: int = 0
    origin_label: _dt.date | None = None

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if arr.ndim != 1:
            raise DataError(f"series must be one-dimensional, got shape {arr.shape}")
        if arr.size < 1:
            raise DataError("series must contain at least one sample")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise NonFiniteError(f"non-finite value at position {bad}")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "origin_index", int(self.origin_index))
        if isinstance(self.origin_label, str):
            object.__setattr__(self, "origin_label", _dt.date.fromisoformat(self.origin_label))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.origin_index == other.origin_index
            and self.origin_label == other.origin_label
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    def phase_of(self, t: int, period: int) -> int:
        return phase_of(self, t, period)

    def phases(self, period: int) -> np.ndarray:
        """Phase of every sample for the given period."""
        _check_period(period)
        return (self.origin_index + np.arange(self.n)) % period

    def label_at(self, t: int) -> _dt.date | None:
        """Calendar date of sample ``t`` (relative to this series)."""
        if self.origin_label is None:
            return None
        return self.origin_label + _dt.timedelta(days=t)

    def with_values(self, values) -> TimeSeries:
        """Same origin bookkeeping, new samples."""
        return TimeSeries(values, self.origin_index, self.origin_label)

    # -- interchange format -------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "origin_index": self.origin_index,
            "origin_label": None if self.origin_label is None else self.origin_label.isoformat(),
            "values": [float(v) for v in self.values],
        }

    def to_json(self) -> str:
        # repr-based float formatting round-trips doubles exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> TimeSeries:
        try:
            values = doc["values"]
            origin = int(doc.get("origin_index", 0))
            label = doc.get("origin_label")
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed series document: {exc}") from exc
        if label is not None:
            try:
                label = _dt.date.fromisoformat(label)
            except (TypeError, ValueError) as exc:
                raise DataError(f"bad origin_label {label!r}") from exc
        return cls(values, origin, label)

    @classmethod
    def from_json(cls, text: str) -> TimeSeries:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"series file is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def save(self, path: str | Path) -> None:
        from ._io import atomic_write_text

        atomic_write_text(path, self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> TimeSeries:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise DataError(f"cannot read series file {path}: {exc}") from exc
        return cls.from_json(text)

    def digest(self) -> str:
        """SHA-256 of the canonical interchange serialization."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def _check_period(period: int) -> None:
    if int(period) != period or period < 1:
        raise InvalidPeriodError(f"period must be a positive integer, got {period!r}")


def phase_of(series: TimeSeries, t: int, period: int) -> int:
    """Phase ``(origin_index + t) mod period`` of sample ``t``."""
    _check_period(period)
    if not 0 <= t < series.n:
        raise BoundsError(f"sample index {t} outside series of length {series.n}")
    return (series.origin_index + int(t)) % int(period)


def trim(series: TimeSeries, start: int, stop: int) -> TimeSeries:
    """Keep samples ``start..stop`` inclusive."""
    if not 0 <= start <= stop < series.n:
        raise BoundsError(f"trim range [{start}, {stop}] invalid for series of length {series.n}")
    if start == 0 and stop == series.n - 1:
        return series
    return TimeSeries(
        series.values[start : stop + 1],
        series.origin_index + start,
        series.label_at(start),
    )


@dataclass(frozen=True)
class ComponentSpec:
    """Harmonic ``harmonic`` of a periodic pattern with period ``period``.

    The bootstrap block is ``period`` for every harmonic: the harmonic's
    own period ``period / harmonic`` is generally not an integer, and a
    full-cycle block keeps the correlation at every harmonic lag.
    """

    period: int
    harmonic: int = 1
    block_period: int | None = None

    def __post_init__(self):
        _check_period(self.period)
        if int(self.harmonic) != self.harmonic or self.harmonic < 1:
            raise InvalidParameterError(f"harmonic index must be a positive integer, got {self.harmonic!r}")
        if Fraction(self.harmonic, self.period) > Fraction(1, 2):
            raise InvalidParameterError(
                f"harmonic {self.harmonic} of period {self.period} is above the Nyquist frequency"
            )
        block = self.period if self.block_period is None else self.block_period
        _check_period(block)
        if block % self.period and not (self.period % self.harmonic == 0 and block % (self.period // self.harmonic) == 0):
            raise InvalidParameterError(
                f"block period {block} is not a multiple of the component period {self.period}/{self.harmonic}"
            )
        object.__setattr__(self, "block_period", int(block))

    @property
    def frequency(self) -> Fraction:
        """Cycles per sample, kept exact."""
        return Fraction(self.harmonic, self.period)

    @property
    def nu(self) -> float:
        return float(self.frequency)

    @property
    def key(self) -> str:
        return f"{self.period}:{self.harmonic}"

    @classmethod
    def parse(cls, text: str) -> ComponentSpec:
        """Parse ``"P"`` or ``"P:j"``."""
        try:
            if ":" in text:
                p, j = text.split(":", 1)
                return cls(int(p), int(j))
            return cls(int(text))
        except ValueError as exc:
            if isinstance(exc, InvalidParameterError):
                raise
            raise InvalidParameterError(f"cannot parse component {text!r}; expected P or P:j") from exc

    def __str__(self) -> str:
        return self.key


@dataclass(frozen=True, eq=False)
class CIBand:
    """Per-phase lower/median/upper envelope over one block cycle."""

    lower: np.ndarray
    median: np.ndarray
    upper: np.ndarray
    alpha: float
    component: ComponentSpec
    method: Method = "VBPBB"
    origin_label: _dt.date | None = field(default=None, compare=False)

    def __post_init__(self):
        lo, md, up = (_frozen_array(a) for a in (self.lower, self.median, self.upper))
        if not (lo.shape == md.shape == up.shape) or lo.ndim != 1:
            raise DataError("band curves must be one-dimensional and equally long")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(md)) and np.all(np.isfinite(up))):
            raise NonFiniteError("band curves must be finite")
        if np.any(lo > md) or np.any(md > up):
            raise DataError("band violates lower <= median <= upper")
        if not 0 < self.alpha < 1:
            raise InvalidParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "median", md)
        object.__setattr__(self, "upper", up)

    @property
    def phases(self) -> np.ndarray:
        return np.arange(self.lower.size)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def __eq__(self, other) -> bool:
        if not isinstance(other, CIBand):
            return NotImplemented
        return (
            self.alpha == other.alpha
            and self.component == other.component
            and self.method == other.method
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.median, other.median)
            and np.array_equal(self.upper, other.upper)
        )

    __hash__ = None  # type: ignore[assignment]

    def calendar_labels(self) -> list[str]:
        """ISO date of the first occurrence of each phase, or empty strings.

        ``origin_label`` must be the date at absolute sample index 0.
        """
        if self.origin_label is None:
            return [""] * self.lower.size
        return [(self.origin_label + _dt.timedelta(days=int(p))).isoformat() for p in self.phases]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "lower": [float(v) for v in self.lower],
            "median": [float(v) for v in self.median],
            "upper": [float(v) for v in self.upper],
        }

    def to_csv(self) -> str:
        lines = ["phase,calendar_label,lower,median,upper"]
        for p, lab, lo, md, up in zip(self.phases, self.calendar_labels(), self.lower, self.median, self.upper):
            lines.append(f"{p},{lab},{float(lo)!r},{float(md)!r},{float(up)!r}")
        return "\n".join(lines) + "\n"
