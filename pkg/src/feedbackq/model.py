"""Model parameters, threshold strategies and triangular state indexing.

The tagged-customer chain lives on states ``(i, j)`` with
``1 <= i <= j <= levels``: ``j`` customers are present and the tagged one
is at position ``i``.  States are flattened level by level, so level ``j``
occupies flat (0-based) indices ``j(j-1)/2 .. j(j-1)/2 + j - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidParameterError

#: Largest threshold the equilibrium scans and matrix builders accept.
X_MAX = 64


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the feedback-queue game.

    ``lam`` is the arrival rate, ``mu`` the service rate, ``q`` the
    probability that a service attempt succeeds, ``alpha`` the discount
    (killing) rate, ``v`` the admission fee and ``reward_scale`` the
    multiplier applied to the discounted reward.  No stability condition
    is imposed because the threshold bounds the queue.
    """

    lam: float
    mu: float
    q: float
    alpha: float = 0.0
    v: float = 0.0
    reward_scale: float = 1.0

    def __post_init__(self):
        checks = [
            (self.lam > 0, "lam must be > 0"),
            (self.mu > 0, "mu must be > 0"),
            (0 < self.q <= 1, "q must lie in (0, 1]"),
            (self.alpha >= 0, "alpha must be >= 0"),
            (self.v >= 0, "v must be >= 0"),
            (self.reward_scale > 0, "reward_scale must be > 0"),
        ]
        for name in ("lam", "mu", "q", "alpha", "v", "reward_scale"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be a finite real, got {value!r}")
        for ok, message in checks:
            if not ok:
                raise InvalidParameterError(message)

    def replace(self, **changes) -> "ModelParams":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return ModelParams(**values)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class ThresholdStrategy:
    """Threshold strategy with real threshold ``x``.

    A customer joins for sure at positions ``<= n``, with probability ``p``
    at position ``n + 1`` and never beyond, where ``n = floor(x)`` and
    ``p = x - n``.  Integer thresholds always carry ``p == 0``.
    """

    x: float
    n: int = field(init=False)
    p: float = field(init=False)

    def __post_init__(self):
        x = self.x
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise InvalidParameterError(f"threshold must be a finite real, got {x!r}")
        if x < 0:
            raise InvalidParameterError(f"threshold must be >= 0, got {x}")
        n = math.floor(x)
        object.__setattr__(self, "x", float(x))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "p", float(x - n))

    @property
    def levels(self) -> int:
        """Largest total population reachable while a tagged customer waits."""
        return self.n + 1

    def join_probability(self, position: int) -> float:
        if position <= self.n:
            return 1.0
        if position == self.n + 1:
            return self.p
        return 0.0

    __call__ = join_probability


def make_strategy(x: float, x_max: float = X_MAX) -> ThresholdStrategy:
    """Build a :class:`ThresholdStrategy`, rejecting thresholds above ``x_max``."""
    strategy = ThresholdStrategy(x)
    if strategy.x > x_max:
        raise InvalidParameterError(f"threshold {strategy.x} exceeds x_max={x_max}")
    return strategy


def as_strategy(x) -> ThresholdStrategy:
    return x if isinstance(x, ThresholdStrategy) else make_strategy(x)


@dataclass(frozen=True)
class StateIndex:
    """Bijection between states ``(i, j)`` and flat indices.

    ``flat`` returns 0-based indices; the 1-based index used in the
    literature is ``j(j-1)/2 + i``.
    """

    n_levels: int

    def __post_init__(self):
        if self.n_levels < 1:
            raise InvalidParameterError("need at least one level")

    @property
    def total(self) -> int:
        return self.n_levels * (self.n_levels + 1) // 2

    @staticmethod
    def level_start(j: int) -> int:
        return j * (j - 1) // 2

    def flat(self, i: int, j: int) -> int:
        if not 1 <= i <= j <= self.n_levels:
            raise InvalidParameterError(f"state ({i}, {j}) outside 1 <= i <= j <= {self.n_levels}")
        return self.level_start(j) + i - 1

    def state(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.total:
            raise InvalidParameterError(f"flat index {k} outside [0, {self.total})")
        j = int((1 + math.isqrt(1 + 8 * k)) // 2)
        # isqrt can land one level high at exact triangular boundaries
        while self.level_start(j) > k:
            j -= 1
        while self.level_start(j + 1) <= k:
            j += 1
        return k - self.level_start(j) + 1, j

    def states(self):
        for j in range(1, self.n_levels + 1):
            for i in range(1, j + 1):
                yield i, j

    def diagonal(self) -> list[int]:
        """Flat indices of the states ``(i, i)`` (tagged customer last in line)."""
        return [self.flat(i, i) for i in range(1, self.n_levels + 1)]

    def served(self) -> list[int]:
        """Flat indices of the states ``(1, j)`` (tagged customer in service)."""
        return [self.level_start(j) for j in range(1, self.n_levels + 1)]


def state_index(x, extra_levels: int = 0) -> StateIndex:
    """State index for threshold ``x``; ``extra_levels`` widens it for deviators."""
    return StateIndex(as_strategy(x).levels + extra_levels)
