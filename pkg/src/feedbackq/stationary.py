"""Queue-length distribution under a common threshold and the stationary payoff."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .model import ModelParams, as_strategy
from .qbd import _check_case


@dataclass(frozen=True)
class StationaryDistribution:
    probs: np.ndarray
    case: str

    def __len__(self):
        return len(self.probs)


def birth_death_rates(params: ModelParams, x, case: str = "N"):
    """Birth rates out of states ``0..L-1`` and death rates out of ``1..L``.

    ``L = floor(x) + 1``.  In the R-case a customer whose service fails in
    the full state ``L`` reneges with probability ``1 - p``, so the top
    death rate becomes ``mu (q + (1 - q)(1 - p))``.
    """
    x = as_strategy(x)
    case = _check_case(case)
    L = x.levels
    births = np.array([params.lam * x.join_probability(j + 1) for j in range(L)])
    deaths = np.full(L, params.mu * params.q)
    if case == "R":
        for j in range(1, L + 1):
            deaths[j - 1] = params.mu * (params.q + (1 - params.q) * (1 - x.join_probability(j)))
    return births, deaths


def stationary_distribution(params: ModelParams, x, case: str = "N") -> StationaryDistribution:
    """Product-form solution over queue lengths ``0..floor(x)+1``."""
    births, deaths = birth_death_rates(params, x, case)
    weights = np.ones(len(births) + 1)
    for j in range(len(births)):
        weights[j + 1] = weights[j] * births[j] / deaths[j]
    return StationaryDistribution(weights / weights.sum(), _check_case(case))


def joining_payoffs(params: ModelParams, x, case: str = "N") -> np.ndarray:
    """Payoff ``R gamma(i, i) - v`` for joining positions ``1..floor(x)+1``."""
    from .solver import discount_vector

    vec = discount_vector(params, x, case=case)
    return params.reward_scale * np.real(vec.diagonal()) - params.v


WEIGHTINGS = ("join", "support")


def aggregate_payoff(pi: np.ndarray, payoffs: np.ndarray, x, weighting: str = "join") -> float:
    """``sum_{i=0}^{floor(x)} pi_i w_i V_i``.

    With ``weighting="join"``, ``w_i = u(i+1)``: an arrival seeing ``i``
    customers joins with that probability and balking earns nothing, so at
    an integer threshold the last state contributes zero.  ``"support"``
    uses ``w_i = 1`` wherever ``u(i+1) > 0``; the two agree whenever the
    marginal payoff is zero, as at an interior equilibrium.
    """
    x = as_strategy(x)
    join = np.array([x.join_probability(i + 1) for i in range(x.n + 1)])
    if weighting == "support":
        join = (join > 0).astype(float)
    elif weighting != "join":
        raise InvalidParameterError(f"weighting must be one of {WEIGHTINGS}")
    return float(pi[:x.n + 1] @ (join * payoffs[:x.n + 1]))


def stationary_payoff(params: ModelParams, x, case: str = "N") -> float:
    """Stationary expected individual payoff under common threshold ``x``."""
    x = as_strategy(x)
    pi = stationary_distribution(params, x, case).probs
    return aggregate_payoff(pi, joining_payoffs(params, x, case), x)


def deadline_payoff(params: ModelParams, x, xi: float, gamma: float = 0.0, weighting: str = "join",
                    accuracy_target: float = 1e-8) -> float:
    """Stationary aggregate of ``P(W_{i+1} <= xi) - gamma`` over arrival states (N-case)."""
    from .sojourn import deadline_probability

    x = as_strategy(x)
    pi = stationary_distribution(params, x, "N").probs
    phi = np.array([deadline_probability(params, x, i, xi, accuracy_target) for i in range(1, x.levels + 1)])
    return aggregate_payoff(pi, phi - gamma, x, weighting)
