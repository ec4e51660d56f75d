"""Jump-chain matrices of the tagged-customer process.

Level ``k`` of the chain holds ``k`` phases (the tagged position).  Every
transition probability has the form ``rate / (lam + mu + alpha)``; the
``alpha`` share of the holding rate is mass lost to killing/discounting.
The same builders therefore serve real discount rates and complex Laplace
arguments.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameterError
from .model import ModelParams, StateIndex, ThresholdStrategy, as_strategy

CASES = ("N", "R")


def _check_case(case: str) -> str:
    case = case.upper()
    if case not in CASES:
        raise InvalidParameterError(f"case must be one of {CASES}, got {case!r}")
    return case


def _check_alpha(alpha) -> complex:
    if not np.isfinite(alpha):
        raise InvalidParameterError(f"alpha must be finite, got {alpha!r}")
    if np.real(alpha) < 0:
        raise InvalidParameterError(f"alpha must have nonnegative real part, got {alpha!r}")
    return alpha


def _scalar_dtype(alpha):
    return np.complex128 if np.iscomplexobj(alpha) else np.float64


@dataclass(frozen=True)
class BlockTridiagonalMatrix:
    """Level-blocked substochastic matrix.

    ``lower[k-1]`` is the ``k x (k-1)`` block to level ``k-1`` (``None`` for
    ``k = 1``), ``diag[k-1]`` the ``k x k`` within-level block and
    ``upper[k-1]`` the ``k x (k+1)`` block to level ``k+1`` (``None`` at
    the top level).
    """

    lower: tuple
    diag: tuple
    upper: tuple
    case: str
    alpha: complex

    @property
    def n_levels(self) -> int:
        return len(self.diag)

    @property
    def index(self) -> StateIndex:
        return StateIndex(self.n_levels)

    @property
    def total(self) -> int:
        return self.index.total

    @property
    def dtype(self):
        return self.diag[0].dtype

    @property
    def scalar_kind(self) -> str:
        return "complex" if np.issubdtype(self.dtype, np.complexfloating) else "real"

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.total, self.total), dtype=self.dtype)
        start = StateIndex.level_start
        for k in range(1, self.n_levels + 1):
            s = start(k)
            out[s:s + k, s:s + k] = self.diag[k - 1]
            if k > 1:
                out[s:s + k, start(k - 1):s] = self.lower[k - 1]
            if k < self.n_levels:
                out[s:s + k, start(k + 1):start(k + 1) + k + 1] = self.upper[k - 1]
        return out

    def row_sums(self) -> np.ndarray:
        return self.to_dense().sum(axis=1)

    def to_csv(self, tol: float = 0.0) -> str:
        """Assembled matrix as ``row,col,value`` triples (1-based flat indices)."""
        dense = self.to_dense()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["row", "col", "value"])
        for r, c in zip(*np.nonzero(np.abs(dense) > tol)):
            value = dense[r, c]
            writer.writerow([r + 1, c + 1, repr(complex(value)) if np.iscomplexobj(value) else repr(float(value))])
        return buf.getvalue()


def _blocks(params: ModelParams, x: ThresholdStrategy, alpha, case: str, n_levels: int):
    lam, mu, q = params.lam, params.mu, params.q
    dtype = _scalar_dtype(alpha)
    denom = lam + mu + alpha
    lower, diag, upper = [], [], []
    for k in range(1, n_levels + 1):
        join = x.join_probability(k + 1) if k < n_levels else 0.0
        # a failed non-tagged customer rejoins at position k
        stay = x.join_probability(k) if case == "R" else 1.0
        a_low = np.zeros((k, k - 1), dtype=dtype) if k > 1 else None
        a_mid = np.zeros((k, k), dtype=dtype)
        a_up = np.zeros((k, k + 1), dtype=dtype) if k < n_levels else None

        a_mid[np.arange(k), np.arange(k)] += lam * (1.0 - join)
        if a_up is not None:
            a_up[np.arange(k), np.arange(k)] = lam * join
        a_mid[0, k - 1] += mu * (1.0 - q)
        for i in range(2, k + 1):
            a_low[i - 1, i - 2] = mu * q + mu * (1.0 - q) * (1.0 - stay)
            a_mid[i - 1, i - 2] += mu * (1.0 - q) * stay

        for block in (a_low, a_mid, a_up):
            if block is not None:
                block /= denom
        lower.append(a_low)
        diag.append(a_mid)
        upper.append(a_up)
    return BlockTridiagonalMatrix(tuple(lower), tuple(diag), tuple(upper), case, alpha)


def build_matrix(params: ModelParams, x, alpha=None, case: str = "N", extra_levels: int = 0) -> BlockTridiagonalMatrix:
    """Jump-chain matrix for the N- or R-case.

    Parameters
    ----------
    alpha : real or complex, optional
        Discount rate or Laplace argument; defaults to ``params.alpha``.
    extra_levels : int
        Levels added above ``floor(x) + 1``.  One extra level models a
        tagged customer who joins at position ``floor(x) + 2`` although
        the others would balk there.
    """
    x = as_strategy(x)
    case = _check_case(case)
    alpha = _check_alpha(params.alpha if alpha is None else alpha)
    if extra_levels < 0:
        raise InvalidParameterError("extra_levels must be >= 0")
    return _blocks(params, x, alpha, case, x.levels + extra_levels)


def build_n_matrix(params: ModelParams, x, alpha=None, extra_levels: int = 0) -> BlockTridiagonalMatrix:
    return build_matrix(params, x, alpha, "N", extra_levels)


def build_r_matrix(params: ModelParams, x, alpha=None) -> BlockTridiagonalMatrix:
    """R-case matrix: the tagged customer uses threshold ``floor(x) + 1``.

    Only the top level differs from the N-case: a failed customer there
    rejoins with probability ``p`` and reneges otherwise.
    """
    return build_matrix(params, x, alpha, "R")


def build_reward_vector(params: ModelParams, x, alpha=None, extra_levels: int = 0) -> np.ndarray:
    """One-step reward: ``mu q / (alpha + lam + mu)`` in every served state ``(1, j)``."""
    x = as_strategy(x)
    alpha = _check_alpha(params.alpha if alpha is None else alpha)
    index = StateIndex(x.levels + extra_levels)
    g = np.zeros(index.total, dtype=_scalar_dtype(alpha))
    g[index.served()] = params.mu * params.q / (alpha + params.lam + params.mu)
    return g


def absorption_mass(params: ModelParams, x, alpha: Optional[float] = None, extra_levels: int = 0) -> np.ndarray:
    """Per-state probability of leaving the transient set in one jump.

    Computed directly from the rates, independently of the matrix blocks:
    killing contributes ``alpha`` everywhere and a successful service of
    the tagged customer contributes ``mu q`` in the served states.
    """
    x = as_strategy(x)
    alpha = params.alpha if alpha is None else alpha
    index = StateIndex(x.levels + extra_levels)
    denom = params.lam + params.mu + alpha
    mass = np.full(index.total, alpha / denom)
    mass[index.served()] += params.mu * params.q / denom
    return mass
