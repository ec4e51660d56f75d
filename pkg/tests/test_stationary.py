import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from feedbackq import ModelParams, stationary_distribution, stationary_payoff
from feedbackq.stationary import aggregate_payoff, birth_death_rates, deadline_payoff, joining_payoffs


def test_product_form_weights():
    pi = stationary_distribution(ModelParams(1, 0.5, 0.3), 2.0).probs
    weights = np.array([1.0, 1 / 0.15, 1 / 0.15 ** 2])
    # queue lengths run up to floor(x) + 1, which is unreachable at an integer threshold
    assert pi[3] == 0.0
    np.testing.assert_allclose(pi[:3], weights / weights.sum(), rtol=1e-14)
    np.testing.assert_allclose(pi[:3] / pi[0], [1, 6.6667, 44.444], rtol=1e-4)


def test_fractional_threshold_truncates():
    pi = stationary_distribution(ModelParams(1, 1, 0.5), 1.25).probs
    assert len(pi) == 3
    assert pi[2] / pi[1] == pytest.approx(0.25 / 0.5)
    assert pi[1] / pi[0] == pytest.approx(1 / 0.5)


def test_reneging_top_death_rate():
    births, deaths = birth_death_rates(ModelParams(1, 1, 0.4), 2.3, "R")
    assert deaths[-1] == pytest.approx(0.4 + 0.6 * 0.7)
    assert np.allclose(deaths[:-1], 0.4)
    assert np.allclose(births, [1, 1, 0.3])


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(0.05, 5), mu=st.floats(0.05, 5), q=st.floats(0.02, 1), x=st.floats(0, 20),
       case=st.sampled_from("NR"))
def test_balance(lam, mu, q, x, case):
    p = ModelParams(lam, mu, q)
    pi = stationary_distribution(p, x, case).probs
    births, deaths = birth_death_rates(p, x, case)
    assert pi.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(pi[:-1] * births, pi[1:] * deaths, rtol=1e-10, atol=1e-300)


def test_table2_payoffs(table2_params):
    assert stationary_payoff(table2_params, 2.369866, "N") == pytest.approx(0.03038, abs=5e-5)
    assert stationary_payoff(table2_params, 2.836592, "R") == pytest.approx(0.02247, abs=5e-5)


def test_last_state_weighted_by_joining_probability():
    p = ModelParams(1, 0.5, 0.3, 0.05, v=0.5)
    pi = stationary_distribution(p, 1.0).probs
    payoffs = joining_payoffs(p, 1.0)
    # at an integer threshold nobody joins in state 1
    assert stationary_payoff(p, 1.0) == pytest.approx(pi[0] * payoffs[0])
    assert aggregate_payoff(pi, payoffs, 1.0, "support") == pytest.approx(pi[0] * payoffs[0])


def test_weightings_agree_at_interior_root(table2_params):
    x = 2.3698664
    pi = stationary_distribution(table2_params, x).probs
    pay = joining_payoffs(table2_params, x)
    assert aggregate_payoff(pi, pay, x, "join") == pytest.approx(aggregate_payoff(pi, pay, x, "support"), abs=1e-6)


def test_deadline_aggregate_integer_row():
    p = ModelParams(1, 2, 0.3)
    assert deadline_payoff(p, 3.0, 8.0, 0.0, "support") == pytest.approx(0.4742, abs=1e-4)
