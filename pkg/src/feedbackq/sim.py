"""Monte Carlo simulation of the feedback queue.

The simulator follows the queue itself (arrivals thinned by the joining
rule, FCFS service, success coins, rejoining or reneging) rather than the
jump-chain matrices, so it is an independent check on them.  Every state
has total event rate ``lam + mu`` (balking arrivals are still events), so
a sojourn of ``K`` events lasts ``Gamma(K, lam + mu)`` time units.

Replications run in vectorised blocks; block ``b`` draws from a Philox
stream keyed by ``(seed, stream, b)``, so results do not depend on how
blocks are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .model import ModelParams, ThresholdStrategy, as_strategy
from .qbd import _check_case

BLOCK = 1 << 16
MODES = ("tagged-sojourn", "stationary-occupancy", "killed-indicator")
_STREAM_TAGGED, _STREAM_KILL, _STREAM_STATIONARY = 1, 2, 3


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    x: ThresholdStrategy
    case: str = "N"
    replications: int = 100_000
    seed: int = 20250101
    mode: str = "tagged-sojourn"

    def __post_init__(self):
        object.__setattr__(self, "x", as_strategy(self.x))
        object.__setattr__(self, "case", _check_case(self.case))
        if self.replications < 1:
            raise InvalidParameterError("replications must be >= 1")
        if self.mode not in MODES:
            raise InvalidParameterError(f"mode must be one of {MODES}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")


@dataclass
class SimEstimate:
    point: float
    std_error: float
    n: int
    extras: dict = field(default_factory=dict)


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, block])))


def _join_table(x: ThresholdStrategy, size: int) -> np.ndarray:
    return np.array([x.join_probability(k) for k in range(size)])


def _sojourn_events(config: SimConfig, i0: int, j0: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Number of events until the tagged customer leaves, per replication."""
    p = config.params
    x = config.x
    join = _join_table(x, x.levels + 4)
    # probability that a failed non-tagged customer rejoins at position j
    stay = join if config.case == "R" else np.ones_like(join)
    p_arrival = p.lam / (p.lam + p.mu)

    i = np.full(size, i0, dtype=np.int64)
    j = np.full(size, j0, dtype=np.int64)
    events = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    while active.size:
        ii, jj = i[active], j[active]
        u = rng.random(active.size)
        w = rng.random(active.size)
        events[active] += 1

        arrival = u < p_arrival
        joined = arrival & (w < join[jj + 1])
        served = ~arrival
        success = served & (w < p.q)
        failure = served & ~success
        tagged = ii == 1

        done = success & tagged
        other_leaves = success & ~tagged
        tagged_rejoins = failure & tagged
        other_fails = failure & ~tagged
        if config.case == "R":
            reneges = other_fails & (rng.random(active.size) >= stay[jj])
        else:
            reneges = np.zeros(active.size, dtype=bool)

        jj = jj + joined - other_leaves - reneges
        ii = np.where(tagged_rejoins, j[active], ii - (other_leaves | other_fails))
        i[active], j[active] = ii, jj
        active = active[~done]
    return events


def _check_start(config: SimConfig, i: int, j: int) -> None:
    if not 1 <= i <= j <= config.x.levels:
        raise InvalidParameterError(f"start state ({i}, {j}) outside 1 <= i <= j <= {config.x.levels}")


def sample_sojourns(config: SimConfig, start_position: int, start_total: int | None = None,
                    stream: int = _STREAM_TAGGED) -> np.ndarray:
    """Raw sojourn times of ``config.replications`` independent tagged customers."""
    j0 = start_position if start_total is None else start_total
    _check_start(config, start_position, j0)
    rate = config.params.lam + config.params.mu
    out = []
    remaining, block = config.replications, 0
    while remaining > 0:
        size = min(BLOCK, remaining)
        rng = block_rng(config.seed, stream, block)
        events = _sojourn_events(config, start_position, j0, rng, size)
        out.append(rng.gamma(events, 1.0 / rate))
        remaining -= size
        block += 1
    return np.concatenate(out)


def _mean_estimate(values: np.ndarray, extras=None) -> SimEstimate:
    n = len(values)
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return SimEstimate(float(values.mean()), se, n, extras or {})


def simulate_tagged(config: SimConfig, start_position: int, start_total: int | None = None,
                    cdf_grid=None, keep_samples: bool = False) -> SimEstimate:
    """Estimate ``E[exp(-alpha W_{i,j})]`` by simulating tagged sojourns.

    ``cdf_grid`` adds the empirical CDF at those times to ``extras``;
    ``extras`` always carries the sample mean sojourn and its standard error.
    """
    samples = sample_sojourns(config, start_position, start_total)
    alpha = config.params.alpha
    extras = {
        "mean_sojourn": float(samples.mean()),
        "mean_sojourn_se": float(samples.std(ddof=1) / np.sqrt(len(samples))) if len(samples) > 1 else 0.0,
    }
    if cdf_grid is not None:
        grid = np.asarray(cdf_grid, dtype=float)
        ordered = np.sort(samples)
        extras["cdf_grid"] = grid
        extras["cdf"] = np.searchsorted(ordered, grid, side="right") / len(ordered)
    if keep_samples:
        extras["samples"] = samples
    return _mean_estimate(np.exp(-alpha * samples), extras)


def simulate_killed(config: SimConfig, start_position: int, start_total: int | None = None) -> SimEstimate:
    """Fraction of sojourns that finish before an independent ``Exp(alpha)`` kill time."""
    alpha = config.params.alpha
    if alpha <= 0:
        raise InvalidParameterError("killing needs alpha > 0")
    j0 = start_position if start_total is None else start_total
    _check_start(config, start_position, j0)
    rate = config.params.lam + config.params.mu
    hits = []
    remaining, block = config.replications, 0
    while remaining > 0:
        size = min(BLOCK, remaining)
        rng = block_rng(config.seed, _STREAM_KILL, block)
        events = _sojourn_events(config, start_position, j0, rng, size)
        sojourn = rng.gamma(events, 1.0 / rate)
        kill = rng.exponential(1.0 / alpha, size)
        hits.append((sojourn < kill).astype(float))
        remaining -= size
        block += 1
    return _mean_estimate(np.concatenate(hits))


@dataclass
class StationaryEstimate:
    probs: np.ndarray
    std_error: np.ndarray
    arrival_probs: np.ndarray
    arrival_std_error: np.ndarray
    n_paths: int
    events: int
    case: str


def simulate_stationary(config: SimConfig, horizon: float, warmup_fraction: float = 0.1) -> StationaryEstimate:
    """Time-average and arrival-epoch queue-length histograms.

    ``config.replications`` independent paths run in parallel from an empty
    queue up to simulated time ``horizon``; the first ``warmup_fraction``
    of that time is discarded.  Standard errors come from the spread
    across paths.
    """
    if not horizon > 0:
        raise InvalidParameterError("horizon must be positive")
    if not 0 <= warmup_fraction < 1:
        raise InvalidParameterError("warmup_fraction must lie in [0, 1)")
    p, x = config.params, config.x
    L = x.levels
    join = _join_table(x, L + 3)
    stay = join if config.case == "R" else np.ones_like(join)
    rate = p.lam + p.mu
    p_arrival = p.lam / rate
    paths = config.replications
    rng = block_rng(config.seed, _STREAM_STATIONARY, 0)

    n = np.zeros(paths, dtype=np.int64)
    clock = np.zeros(paths)
    warmup = warmup_fraction * horizon
    occupancy = np.zeros((paths, L + 1))
    arrivals = np.zeros((paths, L + 1))
    rows = np.arange(paths)
    events = 0
    while True:
        live = clock < horizon
        if not live.any():
            break
        dt = rng.exponential(1.0 / rate, paths)
        start, end = clock, np.minimum(clock + dt, horizon)
        counted = np.clip(end - np.maximum(start, warmup), 0.0, None) * live
        np.add.at(occupancy, (rows, n), counted)
        clock = np.where(live, clock + dt, clock)
        # the event at the end of the holding interval, if still inside the horizon
        happens = live & (clock < horizon)
        u = rng.random(paths)
        w = rng.random(paths)
        arrival = happens & (u < p_arrival)
        observed = arrival & (clock >= warmup)
        np.add.at(arrivals, (rows[observed], n[observed]), 1.0)
        served = happens & ~arrival & (n > 0)
        leaves = served & ((w < p.q) | (rng.random(paths) >= stay[n]))
        n = n + (arrival & (w < join[n + 1])) - leaves
        events += int(happens.sum())

    time_frac = occupancy / occupancy.sum(axis=1, keepdims=True)
    totals = arrivals.sum(axis=1, keepdims=True)
    arrival_frac = np.divide(arrivals, totals, out=np.zeros_like(arrivals), where=totals > 0)

    def mean_se(a):
        se = a.std(axis=0, ddof=1) / np.sqrt(paths) if paths > 1 else np.zeros(a.shape[1])
        return a.mean(axis=0), se

    probs, se = mean_se(time_frac)
    aprobs, ase = mean_se(arrival_frac)
    return StationaryEstimate(probs, se, aprobs, ase, paths, events, config.case)
