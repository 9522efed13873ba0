"""Periodic block bootstrap, CI bands, and the PBB / VBPBB pipelines."""

from __future__ import annotations

import datetime as _dt
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from typing import Literal

import numpy as np

from . import _kernels
from .errors import (
    DataError,
    IncompatibleEnsemblesError,
    IncompleteCycleError,
    InsufficientCyclesError,
    InvalidParameterError,
)
from .kz import KZFTPlan, kzft_apply, reconstruct_real, select_bandwidth
from .series import CIBand, ComponentSpec, Method, TimeSeries, _check_period

ResampleMode = Literal["block", "phasewise"]

_CHUNK = 256


@dataclass(frozen=True)
class BootstrapConfig:
    B: int = 10000
    alpha: float = 0.05
    seed: int = 0
    resample_mode: ResampleMode = "block"

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 1:
            raise InvalidParameterError(f"B must be a positive integer, got {self.B!r}")
        if not 0 < self.alpha < 1:
            raise InvalidParameterError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**128:
            raise InvalidParameterError(f"seed must be a non-negative integer below 2**128, got {self.seed!r}")
        if self.resample_mode not in ("block", "phasewise"):
            raise InvalidParameterError(f"resample_mode must be 'block' or 'phasewise', got {self.resample_mode!r}")

    def with_seed(self, seed: int) -> BootstrapConfig:
        return BootstrapConfig(self.B, self.alpha, seed, self.resample_mode)


def resample_stream(seed: int, b: int) -> np.random.Generator:
    """Independent random stream for resample ``b``.

    Philox is keyed by the master seed and its 256-bit counter starts at
    ``b << 192``, so every resample owns a disjoint slice of the counter
    space and the stream depends on nothing but ``(seed, b)``.
    """
    return np.random.Generator(np.random.Philox(key=int(seed), counter=int(b) << 192))


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 128-bit child seed, used to decorrelate components."""
    words = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(2, np.uint64)
    return int(words[0]) << 64 | int(words[1])


def periodic_mean(series: TimeSeries, period: int) -> np.ndarray:
    """Mean of all samples sharing each phase; phases may have unequal counts."""
    _check_period(period)
    phases = series.phases(period)
    counts = np.bincount(phases, minlength=period)
    if np.any(counts == 0):
        missing = int(np.flatnonzero(counts == 0)[0])
        raise IncompleteCycleError(
            f"phase {missing} of period {period} is never observed in a series of length {series.n}"
        )
    return np.bincount(phases, weights=series.values, minlength=period) / counts


# -- resampling layouts ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _BlockLayout:
    first: int  # position of the first phase-0 sample
    nb: int
    blocks: np.ndarray  # (nb, P)
    fixed_sum: np.ndarray  # per-phase sum of prefix + suffix
    counts: np.ndarray


def _block_layout(series: TimeSeries, period: int) -> _BlockLayout:
    _check_period(period)
    n = series.n
    first = (-series.origin_index) % period
    nb = (n - first) // period if n > first else 0
    if nb < 1:
        raise InsufficientCyclesError(
            f"series of length {n} (origin {series.origin_index}) holds no complete cycle of period {period}"
        )
    x = series.values
    stop = first + nb * period
    phases = series.phases(period)
    fixed = np.r_[0:first, stop:n]
    fixed_sum = np.bincount(phases[fixed], weights=x[fixed], minlength=period)
    counts = np.bincount(phases, minlength=period).astype(np.float64)
    blocks = np.ascontiguousarray(x[first:stop].reshape(nb, period))
    return _BlockLayout(first, nb, blocks, fixed_sum, counts)


@dataclass(frozen=True, eq=False)
class _PhaseLayout:
    pool: np.ndarray
    pool_start: np.ndarray
    phase_of_pos: np.ndarray
    counts: np.ndarray


def _phase_layout(series: TimeSeries, period: int) -> _PhaseLayout:
    _check_period(period)
    if series.n < period:
        raise InsufficientCyclesError(f"series of length {series.n} is shorter than one cycle of period {period}")
    phases = series.phases(period)
    order = np.argsort(phases, kind="stable")
    counts = np.bincount(phases, minlength=period)
    pool_start = np.concatenate([[0], np.cumsum(counts)[:-1]])
    return _PhaseLayout(series.values[order], pool_start, phases, counts)


def _draw_blocks(rng: np.random.Generator, nb: int) -> np.ndarray:
    return rng.integers(0, nb, size=nb)


def _draw_offsets(rng: np.random.Generator, layout: _PhaseLayout) -> np.ndarray:
    return rng.integers(0, layout.counts[layout.phase_of_pos])


def pbb_resample(
    series: TimeSeries,
    period: int,
    rng: np.random.Generator,
    mode: ResampleMode = "block",
) -> TimeSeries:
    """One periodic block bootstrap resample, same length and alignment as ``series``.

    In ``block`` mode the complete cycles (blocks starting at phase 0) are
    drawn with replacement; a leading partial cycle and a trailing partial
    cycle stay fixed in place.  In ``phasewise`` mode every position is
    drawn independently from the samples sharing its phase.
    """
    if mode == "block":
        lay = _block_layout(series, period)
        pick = _draw_blocks(rng, lay.nb)
        out = series.values.copy()
        out[lay.first : lay.first + lay.nb * period] = lay.blocks[pick].ravel()
    elif mode == "phasewise":
        lay = _phase_layout(series, period)
        out = lay.pool[lay.pool_start[lay.phase_of_pos] + _draw_offsets(rng, lay)]
    else:
        raise InvalidParameterError(f"unknown resample mode {mode!r}")
    return series.with_values(out)


# -- ensembles -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PhaseMeanEnsemble:
    """B bootstrapped periodic-mean curves (rows) over one block cycle."""

    curves: np.ndarray
    component: ComponentSpec
    phase_counts: np.ndarray
    calendar_origin: _dt.date | None = field(default=None)

    def __post_init__(self):
        curves = np.asarray(self.curves, dtype=np.float64)
        if curves.ndim != 2 or curves.shape[0] < 1:
            raise DataError("ensemble must be a non-empty B x P matrix")
        if curves.shape[1] != self.component.block_period:
            raise DataError(f"ensemble rows have length {curves.shape[1]}, expected {self.component.block_period}")
        if not np.all(np.isfinite(curves)):
            raise DataError("ensemble contains non-finite values")
        if np.any(np.asarray(self.phase_counts) < 1):
            raise IncompleteCycleError("every phase needs at least one source sample")
        curves.setflags(write=False)
        object.__setattr__(self, "curves", curves)

    @property
    def B(self) -> int:
        return self.curves.shape[0]

    @property
    def period(self) -> int:
        return self.curves.shape[1]


def _calendar_origin(series: TimeSeries) -> _dt.date | None:
    if series.origin_label is None:
        return None
    return series.origin_label - _dt.timedelta(days=series.origin_index)


def _chunk_rows(compute, B: int, workers: int) -> np.ndarray:
    bounds = [(lo, min(lo + _CHUNK, B)) for lo in range(0, B, _CHUNK)]
    if workers <= 1 or len(bounds) == 1:
        parts = [compute(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda lh: compute(*lh), bounds))
    return np.vstack(parts)


def bootstrap_ensemble(
    series: TimeSeries,
    component: ComponentSpec,
    cfg: BootstrapConfig,
    workers: int = 1,
) -> PhaseMeanEnsemble:
    """Row ``b`` is the periodic mean of the resample drawn from stream ``(cfg.seed, b)``.

    Rows are computed in fixed chunks, optionally on a thread pool; every
    row depends only on its own stream so the result is independent of
    ``workers``.
    """
    P = component.block_period
    seed = cfg.seed

    if cfg.resample_mode == "block":
        lay = _block_layout(series, P)

        def compute(lo, hi):
            draws = np.empty((hi - lo, lay.nb), dtype=np.int64)
            for r, b in enumerate(range(lo, hi)):
                draws[r] = _draw_blocks(resample_stream(seed, b), lay.nb)
            return _kernels.block_means(lay.blocks, lay.fixed_sum, lay.counts, draws)

        counts = lay.counts
    else:
        play = _phase_layout(series, P)
        fcounts = play.counts.astype(np.float64)

        def compute(lo, hi):
            draws = np.empty((hi - lo, series.n), dtype=np.int64)
            for r, b in enumerate(range(lo, hi)):
                draws[r] = _draw_offsets(resample_stream(seed, b), play)
            return _kernels.phase_means(play.pool, play.pool_start, play.phase_of_pos, fcounts, draws)

        counts = play.counts

    curves = _chunk_rows(compute, cfg.B, max(1, int(workers)))
    return PhaseMeanEnsemble(curves, component, np.asarray(counts, dtype=np.int64), _calendar_origin(series))


def ci_band(ens: PhaseMeanEnsemble, alpha: float, method: Method = "VBPBB") -> CIBand:
    """Per-phase (alpha/2, 0.5, 1-alpha/2) quantiles of the ensemble rows.

    Quantiles use linear interpolation between order statistics at
    position ``(B-1) q`` (0-based), numpy's default ``linear`` method.
    """
    if ens.B < 1:
        raise DataError("empty ensemble")
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    lo, md, hi = np.quantile(ens.curves, [alpha / 2, 0.5, 1 - alpha / 2], axis=0, method="linear")
    return CIBand(lo, md, hi, alpha, ens.component, method, ens.calendar_origin)


# -- pipelines ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PipelineResult:
    band: CIBand
    ensemble: PhaseMeanEnsemble
    plan: KZFTPlan | None = None
    filtered: TimeSeries | None = None

    @property
    def median_curve(self) -> np.ndarray:
        return self.band.median


def pbb_pipeline(series: TimeSeries, component: ComponentSpec, cfg: BootstrapConfig, workers: int = 1) -> PipelineResult:
    """Bootstrap the raw series with block length ``component.block_period``."""
    ens = bootstrap_ensemble(series, component, cfg, workers)
    return PipelineResult(ci_band(ens, cfg.alpha, "PBB"), ens)


def plan_for(
    component: ComponentSpec,
    all_components,
    n: int,
    m: int | None = None,
    k: int = 1,
) -> KZFTPlan:
    """KZFT plan centred on ``component``; ``m`` defaults to the narrowest
    window that excludes the other components' frequencies and 0."""
    if m is None:
        others = {c.frequency for c in all_components if c != component}
        m = select_bandwidth(component.frequency, others, n=n, k=k)
    return KZFTPlan(m, k, component.frequency)


def vbpbb_pipeline(
    series: TimeSeries,
    component: ComponentSpec,
    all_components,
    cfg: BootstrapConfig,
    m: int | None = None,
    k: int = 1,
    workers: int = 1,
) -> PipelineResult:
    """Band-pass filter around ``component``, then bootstrap the filtered series.

    The filtered series keeps absolute phase bookkeeping (its origin is
    shifted by the filter half-width), so band phases line up with the
    raw series.  ``m=1`` disables filtering and reproduces
    :func:`pbb_pipeline` exactly.
    """
    plan = plan_for(component, all_components, series.n, m, k)
    filtered = reconstruct_real(kzft_apply(series, plan))
    ens = bootstrap_ensemble(filtered, component, cfg, workers)
    return PipelineResult(ci_band(ens, cfg.alpha, "VBPBB"), ens, plan, filtered)


def combine_components(ensembles: list[PhaseMeanEnsemble], alpha: float, method: Method = "VBPBB") -> CIBand:
    """Band of the summed periodic means, pairing resamples by row index.

    All ensembles must share B and the block cycle length; harmonics of
    one fundamental bootstrapped at the fundamental's period qualify.
    """
    if not ensembles:
        raise IncompatibleEnsemblesError("no ensembles to combine")
    first = ensembles[0]
    for e in ensembles[1:]:
        if e.B != first.B:
            raise IncompatibleEnsemblesError(f"ensembles have different B ({first.B} vs {e.B})")
        if e.component.period != first.component.period:
            raise IncompatibleEnsemblesError(
                f"ensembles have different fundamentals ({first.component.period} vs {e.component.period})"
            )
        if e.period != first.period:
            raise IncompatibleEnsemblesError(f"ensembles have different cycle lengths ({first.period} vs {e.period})")
    if len(ensembles) == 1:
        return ci_band(first, alpha, method)
    total = reduce(lambda acc, e: acc + e.curves, ensembles[1:], first.curves)
    counts = np.min(np.stack([e.phase_counts for e in ensembles]), axis=0)
    fundamental = ComponentSpec(first.component.period, 1, first.period)
    return ci_band(PhaseMeanEnsemble(total, fundamental, counts, first.calendar_origin), alpha, method)
