from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vbpbb import (
    BootstrapConfig,
    CIBand,
    ComponentSpec,
    PhaseMeanEnsemble,
    TimeSeries,
    bootstrap_ensemble,
    ci_band,
    combine_components,
    pbb_pipeline,
    pbb_resample,
    periodic_mean,
    resample_stream,
    vbpbb_pipeline,
)
from vbpbb.errors import (
    IncompatibleEnsemblesError,
    IncompleteCycleError,
    InsufficientCyclesError,
    InvalidParameterError,
)

from .oracles import quantile_interp

MODES = ["block", "phasewise"]


# -- periodic mean ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "values, P, expected",
    [
        ([1, 2, 3, 4, 5, 6], 3, [2.5, 3.5, 4.5]),
        ([1, 5, 1, 5], 2, [1, 5]),
        ([1, 2, 3, 4, 5], 2, [3, 3]),
    ],
)
def test_periodic_mean_examples(values, P, expected):
    assert periodic_mean(TimeSeries(values), P).tolist() == expected


def test_periodic_mean_uses_origin():
    s = TimeSeries([1.0, 2.0, 3.0], origin_index=1)
    assert periodic_mean(s, 2).tolist() == [2.0, 2.0]  # phase0={2}, phase1={1,3}


def test_periodic_mean_incomplete():
    with pytest.raises(IncompleteCycleError):
        periodic_mean(TimeSeries([1.0, 2.0]), 3)


# -- single resamples ----------------------------------------------------------------------


@pytest.mark.parametrize("mode", MODES)
def test_identical_cycles_resample_unchanged(mode):
    s = TimeSeries([1, 5, 1, 5, 1, 5])
    for b in range(20):
        assert pbb_resample(s, 2, resample_stream(7, b), mode) == s


def test_block_resample_enumeration():
    # every one of the 2**2 block draws is equally likely
    s = TimeSeries([1.0, 2.0, 3.0, 4.0])
    rng = np.random.default_rng(3)
    counts = Counter(tuple(pbb_resample(s, 2, rng).values) for _ in range(20_000))
    assert set(counts) == {(1, 2, 1, 2), (1, 2, 3, 4), (3, 4, 1, 2), (3, 4, 3, 4)}
    for c in counts.values():
        assert abs(c / 20_000 - 0.25) < 0.02


@pytest.mark.parametrize("mode", MODES)
def test_resample_deterministic(mode):
    s = TimeSeries(np.random.default_rng(0).normal(size=30))
    a = pbb_resample(s, 4, resample_stream(99, 5), mode)
    b = pbb_resample(s, 4, resample_stream(99, 5), mode)
    assert a.values.tobytes() == b.values.tobytes()
    assert a != pbb_resample(s, 4, resample_stream(99, 6), mode)


def test_block_layout_keeps_partial_cycles_fixed():
    # origin 1, period 3: leading partial [0,1], full blocks [2..4],[5..7], trailing [8,9]
    x = np.arange(10, dtype=float)
    s = TimeSeries(x, origin_index=1)
    seen = set()
    for b in range(200):
        out = pbb_resample(s, 3, resample_stream(1, b)).values
        assert out[:2].tolist() == [0, 1]
        assert out[8:].tolist() == [8, 9]
        seen.add(tuple(out[2:8]))
    assert seen == {(2, 3, 4, 2, 3, 4), (2, 3, 4, 5, 6, 7), (5, 6, 7, 2, 3, 4), (5, 6, 7, 5, 6, 7)}


def test_insufficient_cycles():
    with pytest.raises(InsufficientCyclesError):
        pbb_resample(TimeSeries(np.zeros(5), origin_index=1), 5, resample_stream(0, 0))
    with pytest.raises(InsufficientCyclesError):
        pbb_resample(TimeSeries(np.zeros(3)), 5, resample_stream(0, 0), "phasewise")


@given(
    n=st.integers(6, 40),
    P=st.integers(1, 6),
    origin=st.integers(0, 20),
    seed=st.integers(0, 2**63),
    mode=st.sampled_from(MODES),
)
@settings(max_examples=60, deadline=None)
def test_resample_preserves_phase_support(n, P, origin, seed, mode):
    x = np.random.default_rng(seed % 1000).normal(size=n)
    s = TimeSeries(x, origin_index=origin)
    if mode == "block" and (n - (-origin) % P) < P:
        return
    out = pbb_resample(s, P, resample_stream(seed, 0), mode)
    assert out.n == n and out.origin_index == origin
    ph = s.phases(P)
    for t in range(n):
        assert out.values[t] in set(x[ph == ph[t]])


# -- ensembles ---------------------------------------------------------------------------


@pytest.mark.parametrize("mode", MODES)
def test_ensemble_rows_match_composition(mode):
    s = TimeSeries(np.random.default_rng(4).normal(size=47), origin_index=3)
    comp = ComponentSpec(6)
    cfg = BootstrapConfig(B=300, seed=11, resample_mode=mode)
    ens = bootstrap_ensemble(s, comp, cfg)
    assert ens.curves.shape == (300, 6)
    for b in (0, 1, 150, 299):
        expected = periodic_mean(pbb_resample(s, 6, resample_stream(11, b), mode), 6)
        assert np.allclose(ens.curves[b], expected, rtol=1e-13, atol=1e-15)


def test_single_row_ensemble():
    s = TimeSeries(np.arange(12.0))
    ens = bootstrap_ensemble(s, ComponentSpec(4), BootstrapConfig(B=1, seed=5))
    assert ens.B == 1
    assert np.allclose(ens.curves[0], periodic_mean(pbb_resample(s, 4, resample_stream(5, 0)), 4))


@pytest.mark.parametrize("mode", MODES)
def test_identical_cycles_zero_variance(mode):
    s = TimeSeries(np.tile([3.0, -1.0, 2.0], 9))
    ens = bootstrap_ensemble(s, ComponentSpec(3), BootstrapConfig(B=50, seed=1, resample_mode=mode))
    assert np.all(ens.curves == periodic_mean(s, 3))


@pytest.mark.parametrize("mode", MODES)
def test_ensemble_sd_matches_sampling_distribution(mode):
    P, cycles, sigma = 5, 200, 2.0
    x = np.random.default_rng(8).normal(10.0, sigma, size=P * cycles)
    ens = bootstrap_ensemble(TimeSeries(x), ComponentSpec(P), BootstrapConfig(B=2000, seed=3, resample_mode=mode))
    sd = ens.curves.std(axis=0, ddof=1)
    target = sigma / np.sqrt(cycles)
    assert np.all(np.abs(sd / target - 1) < 0.15)


@pytest.mark.parametrize("mode", MODES)
def test_mean_preservation(mode):
    s = TimeSeries(np.random.default_rng(9).normal(size=7 * 40 + 3))
    ens = bootstrap_ensemble(s, ComponentSpec(7), BootstrapConfig(B=4000, seed=2, resample_mode=mode))
    sd = ens.curves.std(axis=0, ddof=1)
    err = np.abs(ens.curves.mean(axis=0) - periodic_mean(s, 7))
    assert np.all(err < 4 * sd / np.sqrt(ens.B))


@pytest.mark.parametrize("mode", MODES)
def test_ensemble_independent_of_workers(mode):
    s = TimeSeries(np.random.default_rng(5).normal(size=400))
    cfg = BootstrapConfig(B=1100, seed=77, resample_mode=mode)
    a = bootstrap_ensemble(s, ComponentSpec(7), cfg, workers=1)
    b = bootstrap_ensemble(s, ComponentSpec(7), cfg, workers=4)
    assert a.curves.tobytes() == b.curves.tobytes()


# -- bands ---------------------------------------------------------------------------------


def _ens(rows):
    rows = np.asarray(rows, dtype=float)
    P = rows.shape[1]
    return PhaseMeanEnsemble(rows, ComponentSpec(P), np.ones(P, dtype=int))


def test_band_degenerate():
    band = ci_band(_ens([[1.0, 2.0]] * 5), 0.05)
    assert band.lower.tolist() == band.median.tolist() == band.upper.tolist() == [1.0, 2.0]


def test_band_interpolated_rank_rule():
    rows = np.array([[4.0, 0], [1.0, 0], [3.0, 0], [2.0, 0]])
    band = ci_band(_ens(rows), 0.5)
    assert (band.lower[0], band.median[0], band.upper[0]) == (1.75, 2.5, 3.25)


def test_band_matches_quantile_oracle(rng):
    rows = rng.normal(size=(257, 3))
    band = ci_band(_ens(rows), 0.1)
    for p in range(3):
        col = sorted(rows[:, p])
        assert band.lower[p] == pytest.approx(quantile_interp(col, 0.05), abs=1e-14)
        assert band.median[p] == pytest.approx(quantile_interp(col, 0.5), abs=1e-14)
        assert band.upper[p] == pytest.approx(quantile_interp(col, 0.95), abs=1e-14)


@given(st.floats(0.01, 0.98), st.floats(0.01, 0.98), st.integers(0, 1000))
@settings(max_examples=50, deadline=None)
def test_band_monotone_in_alpha(a1, a2, seed):
    a1, a2 = sorted((a1, a2))
    ens = _ens(np.random.default_rng(seed).normal(size=(101, 4)))
    wide, narrow = ci_band(ens, a1), ci_band(ens, a2)
    assert np.all(wide.lower <= narrow.lower) and np.all(narrow.upper <= wide.upper)


def test_band_alpha_validated():
    with pytest.raises(InvalidParameterError):
        ci_band(_ens([[1.0, 2.0]]), 1.5)


# -- pipelines --------------------------------------------------------------------------------


@pytest.mark.parametrize("mode", MODES)
def test_pbb_equals_unfiltered_vbpbb(mode):
    s = TimeSeries(np.random.default_rng(6).normal(size=7 * 30 + 2), origin_index=4)
    comp = ComponentSpec(7)
    cfg = BootstrapConfig(B=500, seed=21, resample_mode=mode)
    a = pbb_pipeline(s, comp, cfg).band
    b = vbpbb_pipeline(s, comp, [comp], cfg, m=1).band
    for attr in ("lower", "median", "upper"):
        assert getattr(a, attr).tobytes() == getattr(b, attr).tobytes()


def test_pbb_identical_cycles_zero_width():
    s = TimeSeries(np.tile(np.arange(5.0), 10))
    band = pbb_pipeline(s, ComponentSpec(5), BootstrapConfig(B=200, seed=0)).band
    assert np.all(band.width == 0)


def test_vbpbb_pure_sinusoid():
    P, n = 20, 400
    t = np.arange(n)
    s = TimeSeries(3 * np.sin(2 * np.pi * t / P))
    comp = ComponentSpec(P)
    res = vbpbb_pipeline(s, comp, [comp], BootstrapConfig(B=300, seed=1))
    assert res.plan.m == 41
    assert np.max(res.band.width) < 1e-12
    assert np.allclose(res.band.median, periodic_mean(res.filtered, P), atol=1e-12)
    # the mirror tone at -1/P is not on a null of the m=41 window: ~2.5% leakage
    assert np.allclose(res.band.median, 3 * np.sin(2 * np.pi * np.arange(P) / P), atol=0.03 * 3)


def test_vbpbb_phases_align_with_raw_calendar():
    P = 10
    t = np.arange(200)
    s = TimeSeries(np.cos(2 * np.pi * (t - 3) / P), origin_label="2020-01-22")
    comp = ComponentSpec(P)
    res = vbpbb_pipeline(s, comp, [comp], BootstrapConfig(B=50, seed=1))
    assert res.filtered.origin_index == 10
    assert int(np.argmax(res.band.median)) == 3
    assert res.band.calendar_labels()[0] == "2020-01-22"


def test_combine_zero_variance():
    a = _ens([[1.0, 2.0]] * 4)
    b = _ens([[10.0, -1.0]] * 4)
    band = combine_components([a, b], 0.05)
    assert band.lower.tolist() == band.upper.tolist() == [11.0, 1.0]


def test_combine_single_is_identity(rng):
    e = _ens(rng.normal(size=(99, 5)))
    assert combine_components([e], 0.1) == ci_band(e, 0.1)


def test_combine_pairs_rows(rng):
    a, b = _ens(rng.normal(size=(50, 3))), _ens(rng.normal(size=(50, 3)))
    band = combine_components([a, b], 0.2)
    assert np.allclose(band.median, np.median(a.curves + b.curves, axis=0))


def test_combine_mismatch():
    with pytest.raises(IncompatibleEnsemblesError):
        combine_components([_ens(np.zeros((5, 3))), _ens(np.zeros((6, 3)))], 0.05)
    with pytest.raises(IncompatibleEnsemblesError):
        combine_components([_ens(np.zeros((5, 3))), _ens(np.zeros((5, 4)))], 0.05)
    with pytest.raises(IncompatibleEnsemblesError):
        combine_components([], 0.05)


def test_config_validation():
    for kwargs in ({"B": 0}, {"alpha": 0.0}, {"alpha": 1.0}, {"seed": -1}, {"resample_mode": "x"}):
        with pytest.raises(InvalidParameterError):
            BootstrapConfig(**kwargs)
