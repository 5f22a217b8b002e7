import json
from math import pi

import numpy as np
import pytest

from cpdmd.errors import DataError, UnknownScenarioError
from cpdmd.synth import (
    CHANGE_TYPES, ChangeScenario, SignalParams, catalog_json, generate, lookup, null_scenario,
    scenario_catalog,
)


def _fixed(params, T=100, tau=None):
    return ChangeScenario("fixed", params, params, tau=tau, T=T)


def test_sine_zero_at_full_period():
    x = generate(_fixed(SignalParams(omegas=(6 * pi / 75,), alphas=(1.0,))), 0)
    assert abs(x[24]) <= 1e-12


def test_pure_trend_is_time_index():
    x = generate(_fixed(SignalParams(beta=1.0), T=50), 7)
    np.testing.assert_array_equal(x, np.arange(1, 51))


def test_noiseless_matches_closed_form():
    params = SignalParams(omegas=(0.3, 1.1), alphas=(2.0, -0.5), beta=0.01, gamma=3.0)
    t = np.arange(1, 201)
    expected = 2.0 * np.sin(0.3 * t) - 0.5 * np.sin(1.1 * t) + 0.01 * t + 3.0
    np.testing.assert_allclose(generate(_fixed(params, T=200), 1), expected, atol=1e-12, rtol=0)


def test_pre_and_post_regimes():
    pre, post = SignalParams(gamma=1.0), SignalParams(gamma=5.0)
    x = generate(ChangeScenario("step", pre, post, tau=4, T=6), 0)
    np.testing.assert_array_equal(x, [1, 1, 1, 5, 5, 5])


def test_mean_change_post_level():
    scenario = lookup("mean/3")
    means = [generate(scenario, s)[299:599].mean() for s in range(1000)]
    assert abs(np.mean(means) - 3.0) <= 0.1


def test_unit_noise_variance():
    x = generate(_fixed(SignalParams(sigma=1.0), T=100_000), 11)
    assert 0.98 <= x.var() <= 1.02


def test_determinism_and_distinct_seeds():
    scenario = lookup("variance/0.2")
    np.testing.assert_array_equal(generate(scenario, 3), generate(scenario, 3))
    assert not np.array_equal(generate(scenario, 3), generate(scenario, 4))


def test_catalog_shape():
    catalog = scenario_catalog()
    assert len(catalog) == 21
    assert all(s.tau == 300 and s.T == 600 for s in catalog.values())
    assert {s.kind for s in catalog.values()} == set(CHANGE_TYPES)
    assert all(sum(s.kind == k for s in catalog.values()) == 3 for k in CHANGE_TYPES)


def test_catalog_values():
    catalog = scenario_catalog()
    v = catalog["variance/0.3"]
    assert (v.pre.sigma, v.post.sigma) == (0.1, 0.3)
    assert "double/(9π/75,4π/75)" in catalog
    assert catalog["double/(9π/75,4π/75)"].post.omegas == pytest.approx((9 * pi / 75, 4 * pi / 75))
    assert sorted(catalog[f"periodicity/{k}π/75"].post.omegas[0] for k in (5, 7, 8)) == pytest.approx(
        [5 * pi / 75, 7 * pi / 75, 8 * pi / 75]
    )
    trend = {(s.post.beta, s.post.gamma) for s in catalog.values() if s.kind == "trend"}
    assert trend == {(-1 / 30, 10.0), (0.0, 10.0), (2 / 30, 10.0)}
    assert catalog["trend/(0,10)"].pre.beta == pytest.approx(1 / 30)
    assert {s.post.gamma for s in catalog.values() if s.kind == "mean"} == {-2.0, 3.0, 4.0}
    assert catalog["amplitude/3"].pre.omegas == pytest.approx((13 * pi / 150,))


def test_lookup_accepts_ascii_pi():
    assert lookup("periodicity/5pi/75") is scenario_catalog()["periodicity/5π/75"]
    with pytest.raises(UnknownScenarioError):
        lookup("mean/7")


def test_null_variant():
    null = null_scenario("double", 100_000)
    assert null.tau is None and null.T == 100_000
    assert null.pre == scenario_catalog()["double/(3π/75,5π/75)"].pre
    x = generate(null, 0)
    assert x.shape == (100_000,)
    with pytest.raises(UnknownScenarioError):
        null_scenario("bogus")


def test_invalid_params():
    with pytest.raises(DataError):
        SignalParams(omegas=(1.0,), alphas=())
    with pytest.raises(DataError):
        SignalParams(sigma=-1.0)
    with pytest.raises(DataError):
        ChangeScenario("x", SignalParams(), SignalParams(), tau=700, T=600)


def test_catalog_json_round_trip():
    entries = json.loads(catalog_json())
    assert len(entries) == 21
    assert entries[0]["tau"] == 300 and "pre" in entries[0]
