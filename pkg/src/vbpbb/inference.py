"""Significance tests, band comparison, harmonic scans and variance explained."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, NamedTuple

import numpy as np

from .bootstrap import (
    BootstrapConfig,
    PhaseMeanEnsemble,
    combine_components,
    derive_seed,
    pbb_pipeline,
    plan_for,
    vbpbb_pipeline,
)
from .errors import (
    ConfigError,
    DataError,
    InfeasibleBandwidthError,
    InsufficientCyclesError,
    InsufficientDataError,
    InvalidParameterError,
    UndefinedCorrelationError,
)
from .series import CIBand, ComponentSpec, Method, TimeSeries

MethodChoice = Literal["pbb", "vbpbb", "both"]


class LineTest(NamedTuple):
    significant: bool
    max_lower: float
    min_upper: float


def horizontal_line_test(band: CIBand) -> LineTest:
    """A component is significant when no constant fits inside its band."""
    max_lower = float(np.max(band.lower))
    min_upper = float(np.min(band.upper))
    return LineTest(max_lower > min_upper, max_lower, min_upper)


def median_band_width(band: CIBand) -> float:
    return float(np.median(band.upper - band.lower))


def width_ratio(pbb_band: CIBand, vbpbb_band: CIBand) -> float:
    """Median PBB width over median VBPBB width."""
    if pbb_band.component != vbpbb_band.component:
        raise InvalidParameterError(
            f"bands describe different components ({pbb_band.component} vs {vbpbb_band.component})"
        )
    if pbb_band.lower.size != vbpbb_band.lower.size:
        raise InvalidParameterError("bands are on different phase grids")
    num, den = median_band_width(pbb_band), median_band_width(vbpbb_band)
    if den == 0:
        return 1.0 if num == 0 else math.inf
    return num / den


@dataclass(frozen=True, eq=False)
class SignificanceReport:
    component: ComponentSpec
    method: Method
    significant: bool
    max_lower: float
    min_upper: float
    median_width: float
    band: CIBand | None
    plan_m: int | None = None
    plan_k: int | None = None
    testable: bool = True
    note: str | None = None
    ensemble: PhaseMeanEnsemble | None = field(default=None, repr=False)

    @classmethod
    def from_band(cls, band: CIBand, ensemble=None, plan=None) -> SignificanceReport:
        test = horizontal_line_test(band)
        return cls(
            band.component,
            band.method,
            test.significant,
            test.max_lower,
            test.min_upper,
            median_band_width(band),
            band,
            None if plan is None else plan.m,
            None if plan is None else plan.k,
            ensemble=ensemble,
        )

    @classmethod
    def untestable(cls, component: ComponentSpec, method: Method, note: str) -> SignificanceReport:
        nan = float("nan")
        return cls(component, method, False, nan, nan, nan, None, testable=False, note=note)

    def to_dict(self) -> dict:
        c = self.component
        return {
            "period": str(c.period),
            "harmonic": c.harmonic,
            "frequency": f"{c.harmonic}/{c.period}",
            "m": self.plan_m,
            "k": self.plan_k,
            "method": self.method,
            "testable": self.testable,
            "note": self.note,
            "significant": self.significant,
            "max_lower": _num(self.max_lower),
            "min_upper": _num(self.min_upper),
            "median_width": _num(self.median_width),
            "band": None if self.band is None else self.band.to_dict(),
        }


def _num(x: float):
    if x is None or math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def scan_components(period: int, max_j: int) -> list[ComponentSpec]:
    if max_j < 1:
        raise InvalidParameterError(f"harmonic count must be at least 1, got {max_j}")
    if max_j > period // 2:
        raise InvalidParameterError(f"harmonic {max_j} of period {period} is above the Nyquist frequency")
    return [ComponentSpec(period, j) for j in range(1, max_j + 1)]


def harmonic_scan(
    series: TimeSeries,
    period: int,
    max_j: int,
    cfg: BootstrapConfig,
    other_components: Iterable[ComponentSpec] = (),
    m_overrides: dict[ComponentSpec, int] | None = None,
    workers: int = 1,
) -> list[SignificanceReport]:
    """VBPBB significance of harmonics 1..max_j of ``period``.

    Each passband excludes the other scanned harmonics, every component in
    ``other_components`` and frequency 0.  Harmonics whose filter does not
    fit the series are reported as untestable rather than dropped.
    """
    scanned = scan_components(period, max_j)
    universe = list(dict.fromkeys([*scanned, *other_components]))
    m_overrides = m_overrides or {}
    out = []
    for comp in scanned:
        try:
            res = vbpbb_pipeline(series, comp, universe, cfg, m=m_overrides.get(comp), workers=workers)
        except (InfeasibleBandwidthError, InsufficientDataError, InsufficientCyclesError) as exc:
            out.append(SignificanceReport.untestable(comp, "VBPBB", f"untestable at this n: {exc}"))
            continue
        out.append(SignificanceReport.from_band(res.band, res.ensemble, res.plan))
    return out


def periodic_extension(curve: np.ndarray, like: TimeSeries) -> TimeSeries:
    """Repeat a per-phase curve across the support of ``like`` by absolute phase."""
    curve = np.asarray(curve, dtype=np.float64)
    return like.with_values(curve[like.phases(curve.size)])


def r_squared(original: TimeSeries, reconstruction: TimeSeries) -> float:
    """Squared Pearson correlation over the common absolute support."""
    lo = max(original.origin_index, reconstruction.origin_index)
    hi = min(original.origin_index + original.n, reconstruction.origin_index + reconstruction.n)
    if hi - lo < 2:
        raise DataError("series share fewer than two samples")
    x = original.values[lo - original.origin_index : hi - original.origin_index]
    y = reconstruction.values[lo - reconstruction.origin_index : hi - reconstruction.origin_index]
    xc, yc = x - x.mean(), y - y.mean()
    sxx, syy = float(xc @ xc), float(yc @ yc)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("correlation is undefined for a constant series")
    r2 = float(xc @ yc) ** 2 / (sxx * syy)
    return min(1.0, r2)


def reconstruct_components(original: TimeSeries, medians: Iterable[np.ndarray]) -> TimeSeries:
    """Sum of per-component median curves, each extended periodically."""
    total = np.zeros(original.n)
    for curve in medians:
        total = total + periodic_extension(curve, original).values
    return original.with_values(total)


# -- full analysis ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AnalysisReport:
    reports: list[SignificanceReport]
    width_ratios: dict[str, float]
    r_squared: dict[str, float]
    combined_bands: dict[str, CIBand]
    seed: int
    B: int
    alpha: float
    resample_mode: str
    dataset_digest: str

    def significant(self, method: Method) -> list[ComponentSpec]:
        return [r.component for r in self.reports if r.method == method and r.significant]

    def get(self, component: ComponentSpec, method: Method) -> SignificanceReport:
        for r in self.reports:
            if r.component == component and r.method == method:
                return r
        raise KeyError((component, method))

    def to_dict(self) -> dict:
        return {
            "dataset_digest": self.dataset_digest,
            "seed": self.seed,
            "B": self.B,
            "alpha": self.alpha,
            "resample_mode": self.resample_mode,
            "components": [r.to_dict() for r in self.reports],
            "width_ratios": {k: _num(v) for k, v in self.width_ratios.items()},
            "r_squared": {k: _num(v) for k, v in self.r_squared.items()},
            "combined_bands": {k: b.to_dict() for k, b in self.combined_bands.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def analyze(
    series: TimeSeries,
    periods: Iterable[int],
    harmonics: int = 1,
    cfg: BootstrapConfig | None = None,
    method: MethodChoice = "both",
    m_overrides: dict[ComponentSpec, int] | None = None,
    workers: int = 1,
    dataset_digest: str | None = None,
) -> AnalysisReport:
    """Run PBB and/or VBPBB for every period and its harmonics.

    ``harmonics`` caps the harmonic index; each period scans
    ``1..min(harmonics, period // 2)``.  Every component gets its own seed
    derived from ``(cfg.seed, period, harmonic)``, shared by both methods.
    Infeasible filters raise :class:`InfeasibleBandwidthError` up front.
    """
    cfg = cfg or BootstrapConfig()
    if method not in ("pbb", "vbpbb", "both"):
        raise InvalidParameterError(f"method must be pbb, vbpbb or both, got {method!r}")
    periods = list(dict.fromkeys(int(p) for p in periods))
    if not periods:
        raise InvalidParameterError("at least one period is required")
    if harmonics < 1:
        raise InvalidParameterError(f"harmonics must be at least 1, got {harmonics}")
    m_overrides = dict(m_overrides or {})
    components = sorted(
        {c for p in periods for c in scan_components(p, min(harmonics, p // 2))},
        key=lambda c: (c.period, c.harmonic),
    )
    unknown = set(m_overrides) - set(components)
    if unknown:
        raise InvalidParameterError(f"m override for undeclared component(s): {', '.join(sorted(map(str, unknown)))}")

    do_pbb = method in ("pbb", "both")
    do_vbpbb = method in ("vbpbb", "both")
    if do_vbpbb:
        # fail before any bootstrapping if a passband cannot fit
        for comp in components:
            plan = plan_for(comp, components, series.n, m_overrides.get(comp))
            if plan.length > series.n:
                raise InfeasibleBandwidthError(
                    f"component {comp}: window m={plan.m} needs minimum n = {plan.length}, series has {series.n}",
                    required_n=plan.length,
                )

    reports: list[SignificanceReport] = []
    ratios: dict[str, float] = {}
    for comp in components:
        ccfg = cfg.with_seed(derive_seed(cfg.seed, comp.period, comp.harmonic))
        pbb = vb = None
        if do_pbb:
            res = pbb_pipeline(series, comp, ccfg, workers)
            pbb = SignificanceReport.from_band(res.band, res.ensemble)
            reports.append(pbb)
        if do_vbpbb:
            try:
                res = vbpbb_pipeline(series, comp, components, ccfg, m=m_overrides.get(comp), workers=workers)
            except InsufficientCyclesError as exc:
                raise ConfigError(f"component {comp}: {exc}") from exc
            vb = SignificanceReport.from_band(res.band, res.ensemble, res.plan)
            reports.append(vb)
        if pbb is not None and vb is not None:
            ratios[comp.key] = width_ratio(pbb.band, vb.band)

    r2: dict[str, float] = {}
    combined: dict[str, CIBand] = {}
    if do_vbpbb:
        sig = [r for r in reports if r.method == "VBPBB" and r.significant]
        for r in sig:
            r2[r.component.key] = _safe_r2(series, [r.band.median])
        if sig:
            r2["combined"] = _safe_r2(series, [r.band.median for r in sig])
        for p in periods:
            ens = [r.ensemble for r in sig if r.component.period == p]
            if ens:
                combined[str(p)] = combine_components(ens, cfg.alpha, "VBPBB")

    return AnalysisReport(
        reports,
        ratios,
        r2,
        combined,
        cfg.seed,
        cfg.B,
        cfg.alpha,
        cfg.resample_mode,
        dataset_digest or series.digest(),
    )


def _safe_r2(series: TimeSeries, medians) -> float:
    try:
        return r_squared(series, reconstruct_components(series, medians))
    except UndefinedCorrelationError:
        return float("nan")
