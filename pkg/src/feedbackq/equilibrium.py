"""Symmetric Nash-equilibrium thresholds.

All three criteria share one case analysis over a joining payoff
``f(x, i)`` (payoff at position ``i`` when others use threshold ``x``),
which is nonincreasing in both arguments:

* ``f(0, 1) < 0``: nobody joins;
* ``f(0, 1) = 0``: any threshold in ``[0, 1]``;
* ``f(m, m+1) <= 0 <= f(m, m)``: integer threshold ``m``;
* ``f(m+1, m+1) < 0 < f(m, m+1)``: the root of ``f(., m+1)`` in ``(m, m+1)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameterError, NumericalFailureError, ThresholdUnboundedError
from .model import X_MAX, ModelParams
from .solver import discount_factor

Z_TOL = 1e-10
X_TOL = 1e-8
DEADLINE_X_TOL = 1e-3
CERTIFICATE_STEP = 1e-6
MONOTONE_PROBES = 10


class Kind(str, enum.Enum):
    ZERO = "zero"
    INDIFFERENT = "indifferent"
    INTEGER = "integer"
    INTERIOR = "interior"


@dataclass
class EquilibriumResult:
    threshold: float
    kind: Kind
    m: int
    interval: Optional[tuple] = None
    certificates: dict = field(default_factory=dict)
    iterations: int = 0
    criterion: str = "N"

    def as_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "kind": self.kind.value,
            "m": self.m,
            "interval": list(self.interval) if self.interval else None,
            "certificates": {k: float(v) for k, v in self.certificates.items()},
            "iterations": self.iterations,
            "criterion": self.criterion,
        }


def z_value(params: ModelParams, x, position: int) -> float:
    """N-case payoff ``R E[exp(-alpha W_{i,i})] - v``."""
    return params.reward_scale * float(np.real(discount_factor(params, x, position, case="N"))) - params.v


def z_hat_value(params: ModelParams, x, position: int) -> float:
    """R-case payoff for a customer whose own threshold is ``floor(x) + 1``."""
    return params.reward_scale * float(np.real(discount_factor(params, x, position, case="R"))) - params.v


def _bisect(f: Callable[[float], float], lo: float, hi: float, x_tol: float, f_tol: float):
    """Root of a decreasing ``f`` with ``f(lo) > 0 > f(hi)``."""
    iterations = 0
    mid = 0.5 * (lo + hi)
    while hi - lo > x_tol:
        mid = 0.5 * (lo + hi)
        value = f(mid)
        iterations += 1
        if abs(value) <= f_tol:
            return mid, lo, hi, iterations
        if value > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), lo, hi, iterations


def find_equilibrium(payoff: Callable[[float, int], float], x_max: float = X_MAX, z_tol: float = Z_TOL,
                     x_tol: float = X_TOL, monotone_tol: float = Z_TOL, criterion: str = "N",
                     certificate_step: float = CERTIFICATE_STEP) -> EquilibriumResult:
    """Run the case analysis for a generic payoff ``payoff(x, position)``."""
    z0 = payoff(0.0, 1)
    if z0 < -z_tol:
        return EquilibriumResult(0.0, Kind.ZERO, 0, certificates={"f(0,1)": z0}, criterion=criterion)
    if abs(z0) <= z_tol:
        return EquilibriumResult(0.5, Kind.INDIFFERENT, 0, interval=(0.0, 1.0),
                                 certificates={"f(0,1)": z0}, criterion=criterion)

    m = 1
    while m <= x_max:
        own = payoff(float(m), m)
        nxt = payoff(float(m), m + 1)
        if nxt <= z_tol and own >= -z_tol:
            return EquilibriumResult(float(m), Kind.INTEGER, m, criterion=criterion,
                                     certificates={f"f({m},{m})": own, f"f({m},{m + 1})": nxt})
        if m + 1 > x_max:
            break
        upper = payoff(float(m + 1), m + 1)
        if upper < -z_tol:
            return _interior(payoff, m, nxt, upper, x_tol, z_tol, monotone_tol, criterion, certificate_step)
        m += 1
    raise ThresholdUnboundedError(
        f"joining at position {m + 1} is still profitable at threshold {m} (x_max={x_max})")


def _interior(payoff, m, f_lo, f_hi, x_tol, z_tol, monotone_tol, criterion, certificate_step):
    def f(x):
        return payoff(x, m + 1)

    probes = np.linspace(m, m + 1, MONOTONE_PROBES + 2)[1:-1]
    values = [f_lo] + [f(x) for x in probes] + [f_hi]
    if np.any(np.diff(values) > monotone_tol):
        raise NumericalFailureError(f"payoff at position {m + 1} is not decreasing on ({m}, {m + 1})",
                                    {"probes": probes.tolist(), "values": values})
    root, lo, hi, iterations = _bisect(f, float(m), float(m + 1), x_tol, z_tol)
    step = max(certificate_step, hi - lo)
    below, above = f(max(root - step, m)), f(min(root + step, m + 1))
    if not (below >= -z_tol and above <= z_tol and below >= above):
        raise NumericalFailureError(f"no sign change around interior root {root}",
                                    {"below": below, "above": above})
    return EquilibriumResult(root, Kind.INTERIOR, m, criterion=criterion, iterations=iterations,
                             certificates={f"f({m},{m + 1})": f_lo, f"f({m + 1},{m + 1})": f_hi,
                                           "f(root)": f(root), "f(root-)": below, "f(root+)": above})


def find_equilibrium_n(params: ModelParams, x_max: float = X_MAX, **kwargs) -> EquilibriumResult:
    return find_equilibrium(lambda x, i: z_value(params, x, i), x_max=x_max, criterion="N", **kwargs)


def find_equilibrium_r(params: ModelParams, x_max: float = X_MAX, **kwargs) -> EquilibriumResult:
    return find_equilibrium(lambda x, i: z_hat_value(params, x, i), x_max=x_max, criterion="R", **kwargs)


def find_equilibrium_deadline(params: ModelParams, gamma: float, xi: float, x_max: float = X_MAX,
                              accuracy_target: float = 1e-8, x_tol: float = DEADLINE_X_TOL) -> EquilibriumResult:
    """Equilibrium when a customer joins iff ``P(W <= xi) >= gamma``."""
    from .sojourn import deadline_probability

    if not 0 <= gamma <= 1:
        raise InvalidParameterError(f"gamma must lie in [0, 1], got {gamma}")
    if not (np.isfinite(xi) and xi > 0):
        raise InvalidParameterError(f"deadline must be positive, got {xi}")

    def payoff(x, i):
        return deadline_probability(params, x, i, xi, accuracy_target) - gamma

    # inversion error bounds how well "= 0" can be resolved
    tol = max(Z_TOL, 10 * accuracy_target)
    result = find_equilibrium(payoff, x_max=x_max, z_tol=tol, x_tol=x_tol, monotone_tol=tol,
                              criterion="deadline", certificate_step=x_tol)
    return result
