import numpy as np
import pytest

from feedbackq import InvalidParameterError, ModelParams, SimConfig, discount_factor, simulate_killed, simulate_stationary
from feedbackq import simulate_tagged, stationary_distribution
from feedbackq.sim import BLOCK, sample_sojourns

P = ModelParams(1.0, 0.5, 0.3, 0.05)


def test_reproducible_across_calls():
    cfg = SimConfig(P, 2.5, replications=5000, seed=11)
    a, b = sample_sojourns(cfg, 2), sample_sojourns(cfg, 2)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_sojourns(SimConfig(P, 2.5, replications=5000, seed=12), 2))


def test_blocks_are_prefix_stable():
    small = sample_sojourns(SimConfig(P, 1.5, replications=BLOCK + 10, seed=3), 1)
    large = sample_sojourns(SimConfig(P, 1.5, replications=BLOCK + 500, seed=3), 1)
    assert np.array_equal(small[:BLOCK], large[:BLOCK])


@pytest.mark.parametrize("x,i,case", [(0.5, 1, "N"), (2.4, 3, "N"), (2.4, 3, "R"), (3.0, 2, "R")])
def test_tagged_agrees_with_analytic(x, i, case):
    est = simulate_tagged(SimConfig(P, x, case, replications=200_000, seed=5), i)
    exact = discount_factor(P, x, i, case=case)
    assert abs(est.point - exact) < 4 * est.std_error


def test_killed_agrees_with_analytic():
    est = simulate_killed(SimConfig(P, 2.4, replications=200_000, seed=5), 2)
    assert abs(est.point - discount_factor(P, 2.4, 2)) < 4 * est.std_error


def test_killed_needs_discount():
    with pytest.raises(InvalidParameterError):
        simulate_killed(SimConfig(P.replace(alpha=0.0), 1.0, replications=10), 1)


def test_mean_sojourn_and_cdf_grid():
    est = simulate_tagged(SimConfig(P, 0.5, replications=100_000, seed=2), 1, cdf_grid=[5.0, 10.0])
    assert est.extras["mean_sojourn"] == pytest.approx(1 / 0.15, rel=0.02)
    np.testing.assert_allclose(est.extras["cdf"], 1 - np.exp(-0.15 * np.array([5.0, 10.0])), atol=0.01)


def test_stationary_matches_product_form():
    cfg = SimConfig(P, 2.5, "R", replications=200, seed=9, mode="stationary-occupancy")
    est = simulate_stationary(cfg, horizon=1500.0)
    exact = stationary_distribution(P, 2.5, "R").probs
    assert np.all(np.abs(est.probs - exact) < 5 * est.std_error + 1e-3)
    assert np.all(np.abs(est.arrival_probs - exact) < 5 * est.arrival_std_error + 1e-3)


@pytest.mark.parametrize("kwargs", [dict(replications=0), dict(mode="other"), dict(seed=-1), dict(case="Q")])
def test_config_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        SimConfig(P, 1.0, **kwargs)


def test_bad_start_state():
    with pytest.raises(InvalidParameterError):
        sample_sojourns(SimConfig(P, 1.0, replications=10), 3)
