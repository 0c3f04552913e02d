"""Pure exploration over a continuum of arms (points of [0, 1]).

Rounds are organized in regimes: regime t has length t+1, starts at round
t(t+1)/2, and every round index decomposes uniquely as n = t(t+1)/2 + k with
k in {0, ..., t}. At each regime start (k = 0) the explorer draws one fresh
candidate point from a sampling law ``lambda`` with full support; at offsets
k = 1..t it replays candidate k (the point drawn at round k(k+1)/2). The
recommendation after round n is the empirically best of the first
g(n) = max(1, floor(sqrt(n)/2)) candidates, each of which has been pulled at
least once by then.

``simple_to_cumulative`` wraps any (allocation, recommendation) pair for the
one-shot criterion into a strategy with sublinear cumulative regret: it runs
the base allocation at regime starts, feeds it only the payoffs observed at
those rounds, and spends the rest of each regime playing the base
recommendation.

Environments pair a mean-payoff function on [0, 1] with a noise model
(deterministic or Bernoulli). The built-in tent family peaks at 1:
``mu(x) = max(0, 1 - |x - a| / r)`` for center a and radius r.

Uniform-draw accounting: a lambda draw consumes one uniform, a Bernoulli
reward consumes one, a deterministic reward consumes none.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import RngStream
from .simulator import (
    CurveEstimate,
    _chunks,
    _exact_mean,
    _std_error,
    _validate_checkpoints,
)

__all__ = [
    "DETERMINISTIC",
    "BERNOULLI",
    "Environment",
    "tent_environment",
    "env_reward",
    "RegimePosition",
    "regime_decompose",
    "XHistory",
    "uniform_sampler",
    "xarmed_allocate",
    "candidate_limit",
    "xarmed_recommend",
    "x_simple_regret",
    "x_cumulative_regret",
    "run_xarmed_episode",
    "estimate_xarmed_curve",
    "WrapperResult",
    "simple_to_cumulative",
]

DETERMINISTIC = "deterministic"
BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class Environment:
    """Mean-payoff function plus noise model.

    ``mean_fn`` must map [0, 1] into [0, 1]; continuity is the caller's
    responsibility and is not checked. ``sup_mean`` is the supremum of the
    mean function when known in closed form; regret evaluators need it (or an
    explicit hint) to score recommendations.
    """

    mean_fn: Callable[[float], float]
    noise: str = DETERMINISTIC
    sup_mean: float | None = None
    label: str = "custom"

    def __post_init__(self) -> None:
        if self.noise not in (DETERMINISTIC, BERNOULLI):
            raise ValueError(f"unknown noise model {self.noise!r}")


def tent_environment(a: float, rho2: float, noise: str = DETERMINISTIC) -> Environment:
    """Tent mean-payoff peaking at 1 on x = a with support radius ``rho2``."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"tent center must lie in [0, 1], got {a}")
    if not rho2 > 0.0:
        raise ValueError(f"tent radius must be positive, got {rho2}")

    def mu(x: float) -> float:
        return max(0.0, 1.0 - abs(x - a) / rho2)

    return Environment(mu, noise, sup_mean=1.0, label=f"tent:a={a:g},rho2={rho2:g}")


def env_reward(env: Environment, x: float, rng: RngStream) -> float:
    """Draw one reward for pulling point ``x``."""
    m = env.mean_fn(x)
    if env.noise == DETERMINISTIC:
        return m
    return 1.0 if rng.uniform() < m else 0.0


@dataclass(frozen=True)
class RegimePosition:
    """Regime index t >= 1 and offset k in {0, ..., t}; n = t(t+1)/2 + k."""

    t: int
    k: int


def regime_decompose(n: int) -> RegimePosition:
    """Unique (t, k) with n = t(t+1)/2 + k and 0 <= k <= t."""
    if n < 1:
        raise ValueError(f"round index must be >= 1, got {n}")
    t = (math.isqrt(8 * n + 1) - 1) // 2
    k = n - t * (t + 1) // 2
    return RegimePosition(t, k)


class XHistory:
    """Candidate points in draw order with per-candidate pull statistics."""

    def __init__(self) -> None:
        self.candidates: list[float] = []
        self.counts: list[int] = []
        self.sums: list[float] = []
        self.rounds = 0

    def add_candidate(self, x: float) -> int:
        self.candidates.append(x)
        self.counts.append(0)
        self.sums.append(0.0)
        return len(self.candidates) - 1

    def record(self, index: int, reward: float) -> None:
        self.counts[index] += 1
        self.sums[index] += reward
        self.rounds += 1


def uniform_sampler(rng: RngStream) -> float:
    """Default full-support sampling law: uniform on [0, 1]."""
    return rng.uniform()


def xarmed_allocate(
    history: XHistory,
    n: int,
    lambda_sampler: Callable[[RngStream], float],
    rng: RngStream,
) -> float:
    """Point to pull at round ``n``: fresh draw at regime starts, else replay.

    At offset k = 0 a new candidate is drawn from the sampling law and
    appended to the history; at offsets k >= 1 candidate k is replayed.
    Rounds must be fed in order: replaying a candidate that has not been
    drawn yet is a contract violation.
    """
    pos = regime_decompose(n)
    if pos.k == 0:
        x = lambda_sampler(rng)
        history.add_candidate(x)
        return x
    if pos.k > len(history.candidates):
        raise RuntimeError(
            f"round {n} replays candidate {pos.k} but only "
            f"{len(history.candidates)} were drawn; rounds fed out of order"
        )
    return history.candidates[pos.k - 1]


def candidate_limit(n: int) -> int:
    """Number of candidates the recommendation may consider after round n."""
    return max(1, math.isqrt(n) // 2)


def xarmed_recommend(history: XHistory, n: int) -> float:
    """Empirically best point among the first g(n) candidates.

    g(n) = max(1, floor(sqrt(n)/2)) never exceeds the regime index, so every
    considered candidate has been pulled; ties break to the earliest draw.
    """
    g = min(candidate_limit(n), len(history.candidates))
    if g == 0:
        raise ValueError("no candidate has been drawn yet")
    best_idx = -1
    best = -math.inf
    for s in range(g):
        if history.counts[s] == 0:
            raise ValueError(f"candidate {s + 1} has never been pulled")
        mean = history.sums[s] / history.counts[s]
        if mean > best:
            best = mean
            best_idx = s
    return history.candidates[best_idx]


def _sup_mean(env: Environment, mu_star_hint: float | None) -> float:
    if mu_star_hint is not None:
        return mu_star_hint
    if env.sup_mean is not None:
        return env.sup_mean
    raise ValueError(
        "environment has no closed-form supremum; pass mu_star_hint explicitly"
    )


def x_simple_regret(env: Environment, point: float, mu_star_hint: float | None = None) -> float:
    """sup mu - mu(recommended point)."""
    return _sup_mean(env, mu_star_hint) - env.mean_fn(point)


def x_cumulative_regret(env: Environment, pulls, mu_star_hint: float | None = None) -> float:
    """n * sup mu - sum of mu over the pulled points, in pull order."""
    sup = _sup_mean(env, mu_star_hint)
    total = 0.0
    for x in pulls:
        total += env.mean_fn(x)
    return len(pulls) * sup - total


def run_xarmed_episode(
    env: Environment,
    n: int,
    checkpoints,
    rng: RngStream,
    lambda_sampler: Callable[[RngStream], float] | None = None,
    mu_star_hint: float | None = None,
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """One explorer episode; returns per-checkpoint (simple, cumulative) regrets."""
    cps = _validate_checkpoints(checkpoints, n)
    sampler = lambda_sampler or uniform_sampler
    sup = _sup_mean(env, mu_star_hint)
    history = XHistory()
    mean_total = 0.0
    simple, cumulative = [], []
    cpset = set(cps)
    for t in range(1, n + 1):
        pos = regime_decompose(t)
        x = xarmed_allocate(history, t, sampler, rng)
        idx = len(history.candidates) - 1 if pos.k == 0 else pos.k - 1
        y = env_reward(env, x, rng)
        history.record(idx, y)
        mean_total += env.mean_fn(x)
        if t in cpset:
            rec = xarmed_recommend(history, t)
            simple.append(sup - env.mean_fn(rec))
            cumulative.append(t * sup - mean_total)
    return tuple(simple), tuple(cumulative)


def _xarmed_batch(env, n, cps, seed, r0, count, sampler, hint):
    simple = [np.empty(count) for _ in cps]
    cumulative = [np.empty(count) for _ in cps]
    for j in range(count):
        s, c = run_xarmed_episode(env, n, cps, RngStream(seed, r0 + j), sampler, hint)
        for ci in range(len(cps)):
            simple[ci][j] = s[ci]
            cumulative[ci][j] = c[ci]
    return simple, cumulative


def estimate_xarmed_curve(
    env: Environment,
    checkpoints,
    replicates: int,
    seed: int,
    *,
    threads: int = 1,
    lambda_sampler: Callable[[RngStream], float] | None = None,
    mu_star_hint: float | None = None,
) -> CurveEstimate:
    """Monte-Carlo curve for the regime explorer; replicate r uses stream r."""
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    n = max(checkpoints)
    cps = _validate_checkpoints(checkpoints, n)
    pieces = list(_chunks(replicates, threads))
    if len(pieces) == 1:
        results = [_xarmed_batch(env, n, cps, seed, 0, replicates, lambda_sampler, mu_star_hint)]
    else:
        with ThreadPoolExecutor(max_workers=len(pieces)) as pool:
            futures = [
                pool.submit(
                    _xarmed_batch, env, n, cps, seed, r0, size, lambda_sampler, mu_star_hint
                )
                for r0, size in pieces
            ]
            results = [f.result() for f in futures]
    means, errs, cmeans = [], [], []
    for ci in range(len(cps)):
        vals = np.concatenate([res[0][ci] for res in results])
        cums = np.concatenate([res[1][ci] for res in results])
        m = _exact_mean(vals)
        means.append(m)
        errs.append(_std_error(vals, m))
        cmeans.append(_exact_mean(cums))
    return CurveEstimate(
        checkpoints=cps,
        means=tuple(means),
        std_errors=tuple(errs),
        cumulative_means=tuple(cmeans),
        replicates=replicates,
    )


@dataclass(frozen=True)
class WrapperResult:
    """Pull sequence and cumulative-regret trace of the wrapped strategy."""

    pulls: tuple[float, ...]
    checkpoints: tuple[int, ...]
    cumulative_regrets: tuple[float, ...]
    exploration_rounds: int


def simple_to_cumulative(
    base_allocate: Callable[[list[tuple[float, float]], int, RngStream], float],
    base_recommend: Callable[[list[tuple[float, float]], int], float],
    env: Environment,
    n: int,
    checkpoints,
    rng: RngStream,
    mu_star_hint: float | None = None,
) -> WrapperResult:
    """Run the exploration/exploitation regime wrapper for ``n`` rounds.

    ``base_allocate(base_history, t, rng)`` is called at the start of regime
    t with the (point, payoff) pairs of the previous regime starts;
    ``base_recommend(base_history, t)`` is called at offsets 1..t of regime t
    with the payoffs of regime starts 1..t. Payoffs observed during
    exploitation rounds count toward the cumulative regret but are never
    shown to the base strategies.
    """
    cps = _validate_checkpoints(checkpoints, n)
    sup = _sup_mean(env, mu_star_hint)
    base_history: list[tuple[float, float]] = []
    pulls: list[float] = []
    mean_total = 0.0
    cumulative = []
    exploration_rounds = 0
    cpset = set(cps)
    for t in range(1, n + 1):
        pos = regime_decompose(t)
        if pos.k == 0:
            x = base_allocate(base_history, pos.t, rng)
            y = env_reward(env, x, rng)
            base_history.append((x, y))
            exploration_rounds += 1
        else:
            x = base_recommend(base_history, pos.t)
            env_reward(env, x, rng)
        pulls.append(x)
        mean_total += env.mean_fn(x)
        if t in cpset:
            cumulative.append(t * sup - mean_total)
    return WrapperResult(
        pulls=tuple(pulls),
        checkpoints=cps,
        cumulative_regrets=tuple(cumulative),
        exploration_rounds=exploration_rounds,
    )
