import json

import numpy as np
import pytest

from vbpbb import BootstrapConfig, ComponentSpec, SynthSpec, Wave, coverage_experiment, generate, periodic_mean, true_periodic_mean
from vbpbb.errors import DataError, InvalidParameterError


def test_tabulated_sine():
    x = generate(SynthSpec(8, (Wave(4),)))
    assert np.allclose(x.values, [0, 1, 0, -1, 0, 1, 0, -1], atol=1e-15)


def test_empty_spec_is_zero():
    assert np.array_equal(generate(SynthSpec(10)).values, np.zeros(10))


def test_waveforms():
    t = generate(SynthSpec(8, (Wave(4, 2.0, waveform="square"),))).values
    assert t.tolist() == [2, 2, -2, -2] * 2
    s = generate(SynthSpec(4, (Wave(4, waveform="sawtooth"),))).values
    assert np.allclose(s, [-1, -0.5, 0, 0.5])


def test_trend_and_level_shift():
    x = generate(SynthSpec(5, trend_slope=0.5, level_shifts=((3, 10.0),))).values
    assert x.tolist() == [0, 0.5, 1, 11.5, 12]


def test_seeded_determinism():
    spec = SynthSpec(500, (Wave(7),), noise_sd=1.3, seed=11)
    assert generate(spec).values.tobytes() == generate(spec).values.tobytes()
    assert generate(spec).values.tobytes() != generate(spec.with_seed(12)).values.tobytes()


def test_additivity():
    a = SynthSpec(300, (Wave(30, 2.0),), trend_slope=0.01, noise_sd=0.7, seed=4)
    b = SynthSpec(300, (Wave(7, 0.5, 1.0, "square"),), level_shifts=((100, -3.0),))
    merged = SynthSpec(300, a.components + b.components, 0.01, 0.7, b.level_shifts, seed=4)
    assert np.allclose(generate(a).values + generate(b).values, generate(merged).values, rtol=0, atol=1e-12)


def test_spec_validation_and_json(tmp_path):
    with pytest.raises(InvalidParameterError):
        SynthSpec(5, (Wave(7),))
    with pytest.raises(InvalidParameterError):
        SynthSpec(10, noise_sd=-1)
    with pytest.raises(InvalidParameterError):
        Wave(0)
    with pytest.raises(InvalidParameterError):
        Wave(3, waveform="triangle")
    doc = {"n": 20, "components": [{"period": 5, "amplitude": 2}], "noise_sd": 0.1, "seed": 3}
    p = tmp_path / "spec.json"
    p.write_text(json.dumps(doc))
    assert SynthSpec.load(p) == SynthSpec(20, (Wave(5, 2.0),), noise_sd=0.1, seed=3)
    with pytest.raises(DataError):
        SynthSpec.from_dict({"components": []})


# -- ground truth ------------------------------------------------------------------------------


def test_true_mean_sinusoid():
    assert np.allclose(true_periodic_mean(SynthSpec(8, (Wave(4),)), 4), [0, 1, 0, -1], atol=1e-15)


def test_true_mean_trend():
    c, n = 0.3, 11
    assert true_periodic_mean(SynthSpec(n, trend_slope=c, noise_sd=2.0), 1) == pytest.approx([c * (n - 1) / 2])


def test_true_mean_noise_only_is_trend_only():
    a = true_periodic_mean(SynthSpec(50, trend_slope=0.2, noise_sd=5.0, seed=1), 7)
    b = true_periodic_mean(SynthSpec(50, trend_slope=0.2), 7)
    assert np.array_equal(a, b)


def test_true_mean_monte_carlo():
    spec = SynthSpec(61, (Wave(12, 1.5, 0.3), Wave(5, 0.7, waveform="square")), trend_slope=0.02, noise_sd=1.0)
    P, N = 12, 10_000
    g = np.random.default_rng(2024)
    means = np.array([periodic_mean(generate(spec.with_seed(int(s))), P) for s in g.integers(0, 2**63, N)])
    se = means.std(axis=0, ddof=1) / np.sqrt(N)
    assert np.all(np.abs(means.mean(axis=0) - true_periodic_mean(spec, P)) < 3 * se)


# -- coverage ---------------------------------------------------------------------------------


def test_coverage_noiseless():
    spec = SynthSpec(400, (Wave(40),), seed=1)
    res = coverage_experiment(spec, ComponentSpec(40), BootstrapConfig(B=100, seed=2), replications=3)
    assert res.coverage_fraction == 1.0
    assert res.mean_width_pbb == pytest.approx(0, abs=1e-12)
    assert res.mean_width_vbpbb == pytest.approx(0, abs=1e-12)


def test_vbpbb_coverage_counts_filter_bias():
    # off-grid m leaks a little of the mirror tone, so the filtered mean is biased
    spec = SynthSpec(400, (Wave(40),), seed=1)
    res = coverage_experiment(spec, ComponentSpec(40), BootstrapConfig(B=50), replications=1)
    assert res.coverage_fraction_vbpbb < 0.5


def test_coverage_result_schema():
    spec = SynthSpec(240, (Wave(40),), noise_sd=1.0, seed=1)
    res = coverage_experiment(spec, ComponentSpec(40), BootstrapConfig(B=100), replications=4)
    doc = res.to_dict()
    assert {"coverage_fraction", "mean_width_pbb", "mean_width_vbpbb"} <= set(doc)
    assert doc["replications"] == 4 and len(doc["widths_pbb"]) == 4
    assert 0 <= res.coverage_fraction <= 1
    assert res.to_dict() == coverage_experiment(spec, ComponentSpec(40), BootstrapConfig(B=100), 4).to_dict()
    with pytest.raises(InvalidParameterError):
        coverage_experiment(spec, ComponentSpec(40), BootstrapConfig(B=100), 0)
