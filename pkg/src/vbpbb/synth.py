"""Synthetic periodically correlated series with known periodic means."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .bootstrap import BootstrapConfig, derive_seed, pbb_pipeline, periodic_mean, vbpbb_pipeline
from .errors import DataError, InvalidParameterError
from .inference import median_band_width
from .series import ComponentSpec, TimeSeries

Waveform = Literal["sinusoid", "square", "sawtooth"]


@dataclass(frozen=True)
class Wave:
    period: int
    amplitude: float = 1.0
    phase_offset: float = 0.0
    waveform: Waveform = "sinusoid"

    def __post_init__(self):
        if int(self.period) != self.period or self.period < 1:
            raise InvalidParameterError(f"waveform period must be a positive integer, got {self.period!r}")
        if self.waveform not in ("sinusoid", "square", "sawtooth"):
            raise InvalidParameterError(f"unknown waveform {self.waveform!r}")

    def __call__(self, t: np.ndarray) -> np.ndarray:
        angle = 2 * np.pi * t / self.period + self.phase_offset
        if self.waveform == "sinusoid":
            w = np.sin(angle)
        else:
            frac = np.mod(angle / (2 * np.pi), 1.0)
            w = np.where(frac < 0.5, 1.0, -1.0) if self.waveform == "square" else 2.0 * frac - 1.0
        return self.amplitude * w


@dataclass(frozen=True)
class SynthSpec:
    n: int
    components: tuple[Wave, ...] = ()
    trend_slope: float = 0.0
    noise_sd: float = 0.0
    level_shifts: tuple[tuple[int, float], ...] = ()
    seed: int = 0

    def __post_init__(self):
        comps = tuple(c if isinstance(c, Wave) else Wave(**c) for c in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "level_shifts", tuple((int(i), float(d)) for i, d in self.level_shifts))
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f"n must be a positive integer, got {self.n!r}")
        if comps and self.n < max(c.period for c in comps):
            raise InvalidParameterError("n must cover at least one period of every component")
        if self.noise_sd < 0:
            raise InvalidParameterError("noise_sd must be non-negative")

    def with_seed(self, seed: int) -> SynthSpec:
        return SynthSpec(self.n, self.components, self.trend_slope, self.noise_sd, self.level_shifts, seed)

    @classmethod
    def from_dict(cls, doc: dict) -> SynthSpec:
        try:
            return cls(
                n=int(doc["n"]),
                components=tuple(Wave(**c) for c in doc.get("components", [])),
                trend_slope=float(doc.get("trend_slope", 0.0)),
                noise_sd=float(doc.get("noise_sd", 0.0)),
                level_shifts=tuple(tuple(s) for s in doc.get("level_shifts", [])),
                seed=int(doc.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidParameterError):
                raise
            raise DataError(f"malformed synthetic spec: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> SynthSpec:
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read spec {path}: {exc}") from exc


def _deterministic(spec: SynthSpec) -> np.ndarray:
    t = np.arange(spec.n, dtype=np.float64)
    x = spec.trend_slope * t
    for wave in spec.components:
        x = x + wave(t)
    for at, delta in spec.level_shifts:
        x[max(at, 0) :] += delta
    return x


def generate(spec: SynthSpec) -> TimeSeries:
    """Waves + linear trend + level shifts + iid N(0, noise_sd^2) noise."""
    x = _deterministic(spec)
    if spec.noise_sd > 0:
        rng = np.random.default_rng(spec.seed)
        x = x + spec.noise_sd * rng.standard_normal(spec.n)
    return TimeSeries(x)


def true_periodic_mean(spec: SynthSpec, period: int) -> np.ndarray:
    """Expected periodic mean of ``generate(spec)``.

    Noise has zero mean, so this is the periodic mean of the noise-free
    signal evaluated at the realized sample positions.
    """
    return periodic_mean(TimeSeries(_deterministic(spec)), period)


@dataclass(frozen=True, eq=False)
class CoverageResult:
    coverage_fraction: float
    coverage_fraction_vbpbb: float
    mean_width_pbb: float
    mean_width_vbpbb: float
    widths_pbb: np.ndarray = field(repr=False)
    widths_vbpbb: np.ndarray = field(repr=False)

    @property
    def vbpbb_narrower(self) -> int:
        """Replications where the VBPBB median width beat PBB."""
        return int(np.sum(self.widths_vbpbb < self.widths_pbb))

    def to_dict(self) -> dict:
        return {
            "coverage_fraction": self.coverage_fraction,
            "coverage_fraction_vbpbb": self.coverage_fraction_vbpbb,
            "mean_width_pbb": self.mean_width_pbb,
            "mean_width_vbpbb": self.mean_width_vbpbb,
            "replications": int(self.widths_pbb.size),
            "vbpbb_narrower": self.vbpbb_narrower,
            "widths_pbb": [float(w) for w in self.widths_pbb],
            "widths_vbpbb": [float(w) for w in self.widths_vbpbb],
        }


_COVER_RTOL = 1e-9


def _covered(band, truth: np.ndarray) -> int:
    # the resampled means and the truth are summed in different orders
    slack = _COVER_RTOL * (1.0 + np.abs(truth))
    return int(np.sum((band.lower - slack <= truth) & (truth <= band.upper + slack)))


def coverage_experiment(
    spec: SynthSpec,
    component: ComponentSpec,
    cfg: BootstrapConfig,
    replications: int,
    workers: int = 1,
) -> CoverageResult:
    """Monte-Carlo coverage of the 1-alpha bands for ``component``.

    Replication ``r`` regenerates the data with seed derived from
    ``(spec.seed, r)`` and bootstraps with seed derived from
    ``(cfg.seed, r)``.  Coverage counts (phase, replication) cells whose
    band contains the true periodic mean, up to float rounding.  The
    VBPBB filter excludes the
    frequencies of every wave in the spec.
    """
    if replications < 1:
        raise InvalidParameterError("replications must be at least 1")
    P = component.block_period
    truth = true_periodic_mean(spec, P)
    universe = [component, *{ComponentSpec(w.period) for w in spec.components if w.period >= 2}]
    hits_pbb = hits_vb = 0
    w_pbb = np.empty(replications)
    w_vb = np.empty(replications)
    for r in range(replications):
        series = generate(spec.with_seed(derive_seed(spec.seed, r)))
        rcfg = cfg.with_seed(derive_seed(cfg.seed, r))
        pbb = pbb_pipeline(series, component, rcfg, workers).band
        vb = vbpbb_pipeline(series, component, universe, rcfg, workers=workers).band
        hits_pbb += _covered(pbb, truth)
        hits_vb += _covered(vb, truth)
        w_pbb[r] = median_band_width(pbb)
        w_vb[r] = median_band_width(vb)
    cells = replications * P
    return CoverageResult(hits_pbb / cells, hits_vb / cells, float(w_pbb.mean()), float(w_vb.mean()), w_pbb, w_vb)
