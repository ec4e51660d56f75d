"""Equilibrium joining thresholds for a single-server queue with Bernoulli feedback.

Customers decide whether to join after observing the queue length; a
service succeeds with probability ``q`` and otherwise the customer
rejoins the end of the line.  The package computes discounted sojourn
payoffs on the tagged-customer chain, symmetric equilibrium thresholds,
stationary payoffs and sojourn-time distributions, with a Monte Carlo
simulator as an independent check.
"""

from .equilibrium import (
    EquilibriumResult,
    Kind,
    find_equilibrium_deadline,
    find_equilibrium_n,
    find_equilibrium_r,
    z_hat_value,
    z_value,
)
from .errors import FeedbackQueueError, InvalidParameterError, NumericalFailureError, ThresholdUnboundedError
from .model import ModelParams, StateIndex, ThresholdStrategy, make_strategy
from .qbd import BlockTridiagonalMatrix, build_matrix, build_n_matrix, build_r_matrix, build_reward_vector
from .sim import SimConfig, simulate_killed, simulate_stationary, simulate_tagged
from .sojourn import SojournCdfQuery, deadline_probability, invert_cdf, lst, mean_sojourn, sojourn_cdf
from .solver import discount_factor, discount_vector, solve_dense, solve_level_reduction
from .stationary import deadline_payoff, stationary_distribution, stationary_payoff

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
