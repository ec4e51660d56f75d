"""Solvers for the Poisson equation ``(I - P) gamma = g``.

``solve_dense`` factorises the assembled matrix and serves as the oracle;
``solve_level_reduction`` eliminates levels from the top down using the
blocks directly, which is what parameter sweeps use.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, NumericalFailureError
from .model import ModelParams, StateIndex, as_strategy
from .qbd import BlockTridiagonalMatrix, build_matrix, build_reward_vector

RESIDUAL_RTOL = 1e-12


@dataclass(frozen=True)
class DiscountVector:
    """Expected discount factors ``E[exp(-alpha W_{i,j})]`` by flat state."""

    values: np.ndarray
    alpha: complex
    case: str

    @property
    def index(self) -> StateIndex:
        n_levels = int((np.sqrt(8 * len(self.values) + 1) - 1) // 2)
        return StateIndex(n_levels)

    def at(self, i: int, j: int):
        return self.values[self.index.flat(i, j)]

    def diagonal(self) -> np.ndarray:
        """Values at ``(i, i)``, i.e. for a customer joining at position ``i``."""
        return self.values[self.index.diagonal()]


def _check_residual(P: BlockTridiagonalMatrix, gamma: np.ndarray, g: np.ndarray) -> None:
    dense = P.to_dense()
    residual = np.max(np.abs(gamma - dense @ gamma - g))
    # rounding in P @ gamma scales with gamma, which can dwarf a tiny reward
    scale = max(np.max(np.abs(g)), np.max(np.abs(gamma)))
    if residual > RESIDUAL_RTOL * scale:
        raise NumericalFailureError(f"Poisson residual {residual:.3e} exceeds tolerance",
                                    {"residual": float(residual), "scale": float(scale)})


def _dense_inverse_apply(P: BlockTridiagonalMatrix, rhs: np.ndarray) -> np.ndarray:
    A = np.eye(P.total, dtype=P.dtype) - P.to_dense()
    try:
        with warnings.catch_warnings():
            # singularity is detected and reported below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, scipy.linalg.LinAlgError) as exc:
        raise NumericalFailureError(f"factorisation of I - P failed: {exc}") from exc
    if np.min(np.abs(np.diag(lu))) <= np.finfo(float).eps * np.max(np.abs(np.diag(lu))):
        raise NumericalFailureError("I - P is singular to working precision")
    return scipy.linalg.lu_solve((lu, piv), rhs.astype(np.result_type(P.dtype, rhs.dtype)))


def solve_dense(P: BlockTridiagonalMatrix, g: np.ndarray, check: bool = True) -> DiscountVector:
    """Solve ``(I - P) gamma = g`` with a pivoted LU factorisation."""
    g = np.asarray(g)
    if g.shape != (P.total,):
        raise InvalidParameterError(f"reward vector has shape {g.shape}, expected ({P.total},)")
    gamma = _dense_inverse_apply(P, g)
    if check:
        _check_residual(P, gamma, g)
    return DiscountVector(gamma, P.alpha, P.case)


def _inv(A: np.ndarray) -> np.ndarray:
    try:
        out = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"singular level block: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise NumericalFailureError("non-finite level block inverse")
    return out


def level_reduction_factors(P: BlockTridiagonalMatrix):
    """Backward pass: ``U``, ``Gamma`` and ``G`` for every level.

    ``U[j]`` is the censored within-level block of levels ``<= j``,
    ``G[j] = (I - U[j])^{-1} A_{-1}^{(j)}`` and
    ``Gamma[j] = A_1^{(j-1)} (I - U[j])^{-1}``.  Lists are indexed by level
    (entry 0 unused).
    """
    L = P.n_levels
    U = [None] * (L + 1)
    G = [None] * (L + 1)
    Gamma = [None] * (L + 1)
    inv = [None] * (L + 1)
    U[L] = P.diag[L - 1]
    for j in range(L, 0, -1):
        if j < L:
            U[j] = P.diag[j - 1] + P.upper[j - 1] @ G[j + 1]
        inv[j] = _inv(np.eye(j, dtype=P.dtype) - U[j])
        if j > 1:
            G[j] = inv[j] @ P.lower[j - 1]
            Gamma[j] = P.upper[j - 2] @ inv[j]
    return U, Gamma, G, inv


def solve_level_reduction(P: BlockTridiagonalMatrix, g: np.ndarray, check: bool = True) -> DiscountVector:
    """Solve ``(I - P) gamma = g`` by linear level reduction.

    With ``h_L = g_L`` and ``h_j = g_j + Gamma[j+1] h_{j+1}``, each level
    satisfies ``gamma_j = (I - U[j])^{-1} h_j + G[j] gamma_{j-1}``, so the
    solution is assembled forward from ``gamma_1 = (I - U[1])^{-1} h_1``.
    """
    g = np.asarray(g)
    if g.shape != (P.total,):
        raise InvalidParameterError(f"reward vector has shape {g.shape}, expected ({P.total},)")
    L = P.n_levels
    U, Gamma, G, inv = level_reduction_factors(P)
    start = StateIndex.level_start
    dtype = np.result_type(P.dtype, g.dtype)
    h = [None] * (L + 2)
    h[L] = g[start(L):start(L) + L].astype(dtype)
    for j in range(L - 1, 0, -1):
        h[j] = g[start(j):start(j) + j] + Gamma[j + 1] @ h[j + 1]
    gamma = np.empty(P.total, dtype=dtype)
    prev = inv[1] @ h[1]
    gamma[0:1] = prev
    for j in range(2, L + 1):
        prev = inv[j] @ h[j] + G[j] @ prev
        gamma[start(j):start(j) + j] = prev
    if check:
        _check_residual(P, gamma, g)
    return DiscountVector(gamma, P.alpha, P.case)


def expected_visits(P: BlockTridiagonalMatrix, target=None) -> np.ndarray:
    """Expected visits to ``target`` states before absorption, ``(I - P)^{-1} d``.

    ``target`` is a 0/1 vector or a list of flat indices; by default the
    served states ``(1, j)``.
    """
    d = np.zeros(P.total)
    if target is None:
        d[P.index.served()] = 1.0
    else:
        target = np.asarray(target)
        if target.shape == (P.total,):
            d = target.astype(float)
        else:
            d[target.astype(int)] = 1.0
    return _dense_inverse_apply(P, d)


SOLVERS = {"dense": solve_dense, "level": solve_level_reduction}


def discount_vector(params: ModelParams, x, alpha=None, case: str = "N", method: str = "level",
                    extra_levels: int = 0) -> DiscountVector:
    """Expected discount factors for every state under common threshold ``x``."""
    if method not in SOLVERS:
        raise InvalidParameterError(f"method must be one of {sorted(SOLVERS)}")
    x = as_strategy(x)
    alpha = params.alpha if alpha is None else alpha
    P = build_matrix(params, x, alpha, case, extra_levels)
    g = build_reward_vector(params, x, alpha, extra_levels)
    return SOLVERS[method](P, g)


@lru_cache(maxsize=4096)
def _cached_diagonal(params: ModelParams, x: float, alpha, case: str, extra_levels: int) -> tuple:
    vec = discount_vector(params, x, alpha, case, "level", extra_levels)
    return tuple(vec.diagonal())


def discount_factor(params: ModelParams, x, position: int, alpha=None, case: str = "N"):
    """``E[exp(-alpha W)]`` for a customer joining at ``position``.

    Positions up to ``floor(x) + 1`` use the standard chain; in the N-case
    position ``floor(x) + 2`` (a customer joining where the others would
    balk) is also allowed and uses one extra level.
    """
    x = as_strategy(x)
    case = case.upper()
    limit = x.levels + (1 if case == "N" else 0)
    if not 1 <= position <= limit:
        raise InvalidParameterError(f"position {position} outside 1..{limit} for threshold {x.x}")
    extra = 1 if position == x.levels + 1 else 0
    alpha = params.alpha if alpha is None else alpha
    return _cached_diagonal(params, x.x, alpha, case, extra)[position - 1]
