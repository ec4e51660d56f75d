import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from feedbackq import (Kind, ModelParams, NumericalFailureError, ThresholdUnboundedError, find_equilibrium_deadline,
                       find_equilibrium_n, find_equilibrium_r, z_hat_value, z_value)
from feedbackq.equilibrium import find_equilibrium


def test_table2_first_column(table2_params):
    n = find_equilibrium_n(table2_params)
    r = find_equilibrium_r(table2_params)
    assert n.kind is Kind.INTERIOR and r.kind is Kind.INTERIOR
    assert n.threshold == pytest.approx(2.369866, abs=1e-5)
    assert r.threshold == pytest.approx(2.836592, abs=1e-5)
    assert abs(z_value(table2_params, n.threshold, 3)) < 1e-8
    assert abs(z_hat_value(table2_params, r.threshold, 3)) < 1e-8


def test_zero_threshold():
    p = ModelParams(1, 0.5, 0.3, 0.05, v=0.8)
    # 0.8 exceeds the single-customer payoff 0.75
    res = find_equilibrium_n(p)
    assert res.kind is Kind.ZERO and res.threshold == 0.0


def test_indifference_interval():
    p = ModelParams(1, 0.5, 0.3, 0.05, v=0.75)
    res = find_equilibrium_n(p)
    assert res.kind is Kind.INDIFFERENT
    assert res.interval == (0.0, 1.0) and res.threshold == 0.5


def test_integer_threshold():
    p = ModelParams(1, 0.5, 0.3, 0.1, v=0.5)
    res = find_equilibrium_n(p)
    assert res.kind is Kind.INTEGER and res.threshold == 1.0
    assert z_value(p, 1.0, 1) >= 0 >= z_value(p, 1.0, 2)


def test_unbounded_without_discount():
    with pytest.raises(ThresholdUnboundedError) as info:
        find_equilibrium_n(ModelParams(1, 1, 0.5, 0.0, v=0.1), x_max=8)
    assert info.value.exit_code == 3


def test_generic_payoff_interior_root():
    # f(1, 2) = 0.5 > 0 > f(2, 2) = -1, root of 2 - 1.5 x at x = 4/3
    res = find_equilibrium(lambda x, i: 3 - 1.5 * x - 0.5 * i, x_max=10)
    assert res.kind is Kind.INTERIOR and res.m == 1
    assert res.threshold == pytest.approx(4 / 3, abs=1e-8)


def test_generic_payoff_integer():
    res = find_equilibrium(lambda x, i: 2.5 - 0.1 * x - i, x_max=10)
    assert res.kind is Kind.INTEGER and res.threshold == 2.0


def test_non_monotone_payoff_is_rejected():
    def payoff(x, i):
        return 1.0 if i == 1 else 0.5 - (x - 1) + 0.4 * np.sin(30 * x)

    with pytest.raises(NumericalFailureError) as info:
        find_equilibrium(payoff, x_max=4)
    assert info.value.exit_code == 4 and "values" in info.value.diagnostics


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.2, 2), mu=st.floats(0.2, 2), q=st.floats(0.1, 1), alpha=st.floats(0.02, 0.5),
       frac=st.floats(0.2, 0.95))
def test_reneging_threshold_not_smaller(lam, mu, q, alpha, frac):
    base = ModelParams(lam, mu, q, alpha)
    v = frac * mu * q / (alpha + mu * q)
    p = base.replace(v=v)
    try:
        n, r = find_equilibrium_n(p, x_max=30), find_equilibrium_r(p, x_max=30)
    except ThresholdUnboundedError:
        return
    assert r.threshold >= n.threshold - 1e-7


def test_deadline_fig2():
    res = find_equilibrium_deadline(ModelParams(1, 2, 0.3), 0.85, 10.0)
    assert res.threshold == pytest.approx(3.607, abs=2e-3)


@pytest.mark.parametrize("gamma,xi", [(-0.1, 10), (1.1, 10), (0.5, 0), (0.5, np.inf)])
def test_deadline_validation(gamma, xi):
    from feedbackq import InvalidParameterError

    with pytest.raises(InvalidParameterError):
        find_equilibrium_deadline(ModelParams(1, 2, 0.3), gamma, xi)


def test_result_dict(table2_params):
    d = find_equilibrium_n(table2_params).as_dict()
    assert d["kind"] == "interior" and d["criterion"] == "N"
    assert set(d) >= {"threshold", "kind", "m", "certificates", "iterations"}
