"""Sojourn-time distribution by numerical Laplace inversion.

The transform ``E[exp(-s W)]`` is the discount factor evaluated at a
complex rate ``s``; dividing by ``s`` gives the ordinary Laplace
transform of the CDF, which is inverted with the Euler algorithm of
Abate and Whitt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParameterError, NumericalFailureError
from .model import ModelParams, ThresholdStrategy, as_strategy
from .solver import discount_factor

DEFAULT_TERMS = 16
MAX_TERMS = 22
DEFAULT_ACCURACY = 1e-6


def lst(params: ModelParams, x, i: int, alpha) -> complex:
    """Laplace-Stieltjes transform of the N-case sojourn time from position ``i``."""
    alpha = complex(alpha)
    if alpha.real < 0:
        raise InvalidParameterError(f"transform argument needs Re >= 0, got {alpha}")
    if alpha.imag == 0:
        return complex(discount_factor(params, x, i, alpha.real))
    return complex(discount_factor(params, x, i, alpha))


def euler_weights(M: int):
    """Nodes ``beta_k`` and weights ``eta_k`` of the Euler inversion with ``2M+1`` terms."""
    k = np.arange(2 * M + 1)
    beta = M * math.log(10.0) / 3.0 + 1j * math.pi * k
    xi = np.zeros(2 * M + 1)
    xi[0] = 0.5
    xi[1:M + 1] = 1.0
    xi[2 * M] = 2.0 ** -M
    for j in range(1, M):
        xi[2 * M - j] = xi[2 * M - j + 1] + 2.0 ** -M * math.comb(M, j)
    eta = 10.0 ** (M / 3.0) * (-1.0) ** k * xi
    return beta, eta


def euler_invert(transform: Callable[[complex], complex], times: Sequence[float], M: int = DEFAULT_TERMS) -> np.ndarray:
    """Invert an ordinary Laplace transform at each of ``times``."""
    beta, eta = euler_weights(M)
    out = np.empty(len(times))
    for n, t in enumerate(times):
        values = np.array([transform(b / t) for b in beta])
        out[n] = float(np.sum(eta * values.real)) / t
    return out


@dataclass(frozen=True)
class SojournCdfQuery:
    x: ThresholdStrategy
    position: int
    times: tuple
    accuracy_target: float = DEFAULT_ACCURACY

    def __post_init__(self):
        object.__setattr__(self, "x", as_strategy(self.x))
        times = tuple(float(t) for t in np.atleast_1d(self.times))
        if not times:
            raise InvalidParameterError("need at least one time point")
        if not all(math.isfinite(t) and t > 0 for t in times):
            raise InvalidParameterError("times must be positive and finite")
        object.__setattr__(self, "times", times)
        if not 1 <= self.position <= self.x.levels:
            raise InvalidParameterError(f"position {self.position} outside 1..{self.x.levels}")
        if not self.accuracy_target > 0:
            raise InvalidParameterError("accuracy_target must be positive")


@dataclass
class InversionReport:
    values: np.ndarray
    terms: int
    error_estimate: float
    diagnostics: dict = field(default_factory=dict)


def _invert_with_estimate(transform, times, accuracy: float, M: int):
    previous = euler_invert(transform, times, M - 4)
    while True:
        current = euler_invert(transform, times, M)
        estimate = float(np.max(np.abs(current - previous)))
        if estimate <= accuracy or M >= MAX_TERMS:
            return current, M, estimate
        previous, M = current, M + 2


def invert_cdf(params: ModelParams, x, position: int, times, accuracy_target: float = DEFAULT_ACCURACY,
               terms: int = DEFAULT_TERMS) -> InversionReport:
    """CDF values with an error estimate; raises if the target cannot be met."""
    query = SojournCdfQuery(x, position, times, accuracy_target)
    x = query.x

    def transform(s):
        return lst(params, x, position, s) / s

    order = np.argsort(query.times)
    sorted_times = [query.times[k] for k in order]
    raw, M, estimate = _invert_with_estimate(transform, sorted_times, accuracy_target, terms)
    diagnostics = {"terms": M, "error_estimate": estimate}
    if estimate > accuracy_target:
        raise NumericalFailureError(
            f"inversion error estimate {estimate:.2e} exceeds target {accuracy_target:.2e}", diagnostics)
    overshoot = max(float(-raw.min()), float(raw.max() - 1.0), 0.0)
    ripple = float(max(0.0, -np.min(np.diff(raw)))) if len(raw) > 1 else 0.0
    diagnostics.update(overshoot=overshoot, ripple=ripple)
    if overshoot > accuracy_target or ripple > accuracy_target:
        raise NumericalFailureError(
            f"inverted CDF leaves [0, 1] or decreases by more than {accuracy_target:.2e}", diagnostics)
    cleaned = np.maximum.accumulate(np.clip(raw, 0.0, 1.0))
    values = np.empty_like(cleaned)
    values[order] = cleaned
    return InversionReport(values, M, estimate, diagnostics)


def sojourn_cdf(query: SojournCdfQuery, params: ModelParams) -> list:
    """``P(W <= w)`` at each requested time for a customer joining at ``query.position``."""
    report = invert_cdf(params, query.x, query.position, query.times, query.accuracy_target)
    return report.values.tolist()


def deadline_probability(params: ModelParams, x, position: int, deadline: float,
                         accuracy_target: float = DEFAULT_ACCURACY) -> float:
    """Probability of completing service within ``deadline``."""
    return float(invert_cdf(params, x, position, [deadline], accuracy_target).values[0])


def mean_sojourn(params: ModelParams, x, position: int, h: float = 1e-6) -> float:
    """``E[W]`` from a finite difference of the transform at 0 along the imaginary axis."""
    # E[exp(-i h W)] = 1 - i h E[W] + O(h^2), with the O(h^2) term real
    return -lst(params, x, position, 1j * h).imag / h
