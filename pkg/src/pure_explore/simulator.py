"""Game loop, Monte-Carlo curve estimation and an exact enumeration oracle.

``run_episode`` plays one episode: each round the allocation sees rounds
1..t-1, the pulled arm's reward is drawn, and at requested checkpoints the
recommendation (which sees rounds 1..t) is scored by its exact expected gap.
Randomized recommendations are never sampled; scoring a probability vector
by ``sum_i p_i * gap_i`` has the same expectation and less variance.

``estimate_curve`` averages episodes over replicates. Replicate ``r`` always
consumes ``RngStream(seed, r)``, so results are independent of chunking,
thread count and execution order. Two engines exist: a vectorized numpy one
(the default) and a plain loop over ``run_episode``; they produce bitwise
identical per-replicate values, which the tests assert.

Aggregation is exact: the mean over replicates is the correctly rounded
value of the exact rational average (replicate values are grouped with
``np.unique`` and summed as ``Fraction``). This makes the reported mean
independent of reduction order and bitwise equal to the oracle value on
degenerate instances.

``exact_expected_simple_regret`` enumerates every reward outcome sequence of
a Bernoulli/Dirac instance with its probability, memoizing on the per-arm
(count, sum) statistics -- every strategy here is a function of those, so the
merge is lossless.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    BanditInstance,
    Bernoulli,
    Dirac,
    History,
    Recommendation,
    RngStream,
    cumulative_regret,
    expected_simple_regret,
    sample_reward,
    uniforms_for_streams,
)
from .strategies import (
    FLOOR_MULTIPLE_OF_K,
    AllocationStrategy,
    Eba,
    Edp,
    Mpa,
    RecommendationStrategy,
    Ucb,
    _eba_from_stats,
    allocate,
    mpa_recommend,
    recommend,
)

__all__ = [
    "EpisodeResult",
    "CurveEstimate",
    "OracleBudgetError",
    "default_checkpoints",
    "run_episode",
    "estimate_curve",
    "estimate_curves",
    "exact_expected_simple_regret",
    "exact_oracle_diagnostics",
]


@dataclass(frozen=True)
class EpisodeResult:
    """One episode: simple regret at each checkpoint plus final bookkeeping."""

    checkpoints: tuple[int, ...]
    simple_regrets: tuple[float, ...]
    cumulative_regrets: tuple[float, ...]
    final_counts: tuple[int, ...]
    final_cumulative_regret: float


@dataclass(frozen=True)
class CurveEstimate:
    """Monte-Carlo estimate of expected simple regret per checkpoint.

    ``std_errors`` are sample standard deviations divided by sqrt(replicates)
    (0.0 by convention for a single replicate). ``cumulative_means`` carry the
    matching estimates of expected cumulative regret.
    """

    checkpoints: tuple[int, ...]
    means: tuple[float, ...]
    std_errors: tuple[float, ...]
    cumulative_means: tuple[float, ...]
    replicates: int


class OracleBudgetError(RuntimeError):
    """Raised when exact enumeration would expand more states than allowed."""


def default_checkpoints(n: int) -> tuple[int, ...]:
    """Geometric grid 1, 2, 4, ... capped at and always including ``n``."""
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    cps = []
    c = 1
    while c < n:
        cps.append(c)
        c *= 2
    cps.append(n)
    return tuple(cps)


def _validate_checkpoints(checkpoints, n: int) -> tuple[int, ...]:
    cps = tuple(int(c) for c in checkpoints)
    if not cps:
        raise ValueError("need at least one checkpoint")
    if list(cps) != sorted(set(cps)):
        raise ValueError("checkpoints must be strictly increasing")
    if cps[0] < 1 or cps[-1] > n:
        raise ValueError(f"checkpoints must lie in 1..{n}")
    return cps


def run_episode(
    instance: BanditInstance,
    allocation: AllocationStrategy,
    recommendation: RecommendationStrategy,
    n: int,
    checkpoints,
    rng: RngStream,
) -> EpisodeResult:
    """Play one n-round episode, scoring the recommendation at checkpoints."""
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    cps = _validate_checkpoints(checkpoints, n)
    cpset = set(cps)
    history = History(instance.k)
    simple = []
    cumulative = []
    for t in range(1, n + 1):
        arm = allocate(allocation, history, t)
        reward = sample_reward(instance.arms[arm - 1], rng)
        history.record(arm, reward)
        if t in cpset:
            rec = recommend(recommendation, history)
            simple.append(expected_simple_regret(instance, rec))
            cumulative.append(cumulative_regret(instance, history))
    return EpisodeResult(
        checkpoints=cps,
        simple_regrets=tuple(simple),
        cumulative_regrets=tuple(cumulative),
        final_counts=tuple(history.counts),
        final_cumulative_regret=cumulative_regret(instance, history),
    )


# ---------------------------------------------------------------------------
# Aggregation: correctly rounded means, deterministic standard errors.
# ---------------------------------------------------------------------------


def _exact_mean(values: np.ndarray) -> float:
    """Correctly rounded average of float64 values (exact rational sum)."""
    vals, counts = np.unique(values, return_counts=True)
    total = Fraction(0)
    for v, c in zip(vals.tolist(), counts.tolist()):
        total += Fraction(v) * int(c)
    return float(total / int(values.size))


def _std_error(values: np.ndarray, mean: float) -> float:
    n = int(values.size)
    if n < 2:
        return 0.0
    vals, counts = np.unique(values, return_counts=True)
    ss = math.fsum(
        int(c) * (v - mean) * (v - mean) for v, c in zip(vals.tolist(), counts.tolist())
    )
    return math.sqrt(ss / (n - 1)) / math.sqrt(n)


def _aggregate(values_per_checkpoint, cumulative_per_checkpoint, cps, replicates):
    means, errs, cmeans = [], [], []
    for vals, cums in zip(values_per_checkpoint, cumulative_per_checkpoint):
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


# ---------------------------------------------------------------------------
# Vectorized engine. One batch simulates all replicates of one allocation at
# once and evaluates any number of recommendations at the checkpoints; the
# EBA floor policy is evaluated at round K*floor(c/K) instead of c (same
# random variable: the truncated history at c is the history at that round).
# ---------------------------------------------------------------------------


def _eba_floor_round(c: int, k: int) -> int:
    m = k * (c // k)
    if m == 0:
        raise ValueError(f"EBA floor policy is undefined at checkpoint {c} < K={k}")
    return m


def _eval_rounds(cps, recs, k: int) -> dict[int, list[tuple[int, int]]]:
    """Map round -> [(rec index, checkpoint position)] to evaluate there."""
    rounds: dict[int, list[tuple[int, int]]] = {}
    for ri, rec in enumerate(recs):
        for ci, c in enumerate(cps):
            r = c
            if isinstance(rec, Eba) and rec.round_policy == FLOOR_MULTIPLE_OF_K:
                r = _eba_floor_round(c, k)
            rounds.setdefault(r, []).append((ri, ci))
    return rounds


def _rec_values(rec, t_arr, s_arr, t: int, g_arr) -> np.ndarray:
    """Per-replicate expected simple regret of ``rec`` on stats (T, S) at round t."""
    if isinstance(rec, Edp):
        acc = np.zeros(t_arr.shape[0])
        for i in range(t_arr.shape[1]):
            acc += (t_arr[:, i] / t) * g_arr[i]
        return acc
    if isinstance(rec, Eba):
        with np.errstate(divide="ignore", invalid="ignore"):
            mu = np.where(t_arr > 0, s_arr / t_arr, -np.inf)
        return g_arr[np.argmax(mu, axis=1)]
    return g_arr[np.argmax(t_arr, axis=1)]


def _cumulative_values(t_arr, g_arr) -> np.ndarray:
    acc = np.zeros(t_arr.shape[0])
    for i in range(t_arr.shape[1]):
        acc += t_arr[:, i] * g_arr[i]
    return acc


def _vector_batch(instance, allocation, recs, n, cps, seed, r0, count):
    k = instance.k
    g_arr = np.array(instance.gaps)
    eval_rounds = _eval_rounds(cps, recs, k)
    streams = np.arange(r0, r0 + count, dtype=np.uint64)
    t_arr = np.zeros((count, k))
    s_arr = np.zeros((count, k))
    rows = np.arange(count)
    all_bernoulli = all(isinstance(a, Bernoulli) for a in instance.arms)
    p_arr = np.array([a.mean for a in instance.arms]) if all_bernoulli else None
    alpha = allocation.alpha if isinstance(allocation, Ucb) else None
    mu_buf = np.empty((count, k))
    bonus_buf = np.empty((count, k))

    values = [[None] * len(cps) for _ in recs]
    cumulative = [None] * len(cps)
    for t in range(1, n + 1):
        if alpha is None or t <= k:
            # Unif cycles; UCB's first K rounds pull arms in index order (the
            # never-pulled sentinel outranks every finite index)
            arm = (t - 1) % k
            sel = None
        else:
            s = alpha * math.log(t)
            np.divide(s_arr, t_arr, out=mu_buf)
            np.divide(s, t_arr, out=bonus_buf)
            np.sqrt(bonus_buf, out=bonus_buf)
            np.add(mu_buf, bonus_buf, out=mu_buf)
            sel = np.argmax(mu_buf, axis=1)
        u = uniforms_for_streams(seed, streams, t - 1)
        if sel is None:
            rewards = instance.arms[arm].sample_many(u)
            t_arr[:, arm] += 1.0
            s_arr[:, arm] += rewards
        else:
            if all_bernoulli:
                rewards = np.where(u < p_arr[sel], 1.0, 0.0)
            else:
                rewards = np.empty(count)
                for i, a in enumerate(instance.arms):
                    mask = sel == i
                    if mask.any():
                        rewards[mask] = a.sample_many(u[mask])
            t_arr[rows, sel] += 1.0
            s_arr[rows, sel] += rewards
        targets = eval_rounds.get(t)
        if targets is not None:
            for ri, ci in targets:
                values[ri][ci] = _rec_values(recs[ri], t_arr, s_arr, t, g_arr)
        if t in cps:
            cumulative[cps.index(t)] = _cumulative_values(t_arr, g_arr)
    return values, cumulative


def _sequential_batch(instance, allocation, recs, n, cps, seed, r0, count):
    values = [[np.empty(count) for _ in cps] for _ in recs]
    cumulative = [np.empty(count) for _ in cps]
    for j in range(count):
        rng = RngStream(seed, r0 + j)
        history = History(instance.k)
        pos = 0
        for t in range(1, n + 1):
            arm = allocate(allocation, history, t)
            reward = sample_reward(instance.arms[arm - 1], rng)
            history.record(arm, reward)
            if pos < len(cps) and t == cps[pos]:
                for ri, rec in enumerate(recs):
                    r = recommend(rec, history)
                    values[ri][pos][j] = expected_simple_regret(instance, r)
                cumulative[pos][j] = cumulative_regret(instance, history)
                pos += 1
    return values, cumulative


def _chunks(total: int, parts: int):
    parts = max(1, min(parts, total))
    base, extra = divmod(total, parts)
    start = 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        yield start, size
        start += size


def _run_batches(instance, allocation, recs, n, cps, seed, replicates, threads, engine):
    batch = _vector_batch if engine == "vector" else _sequential_batch
    pieces = list(_chunks(replicates, threads))
    if len(pieces) == 1:
        return batch(instance, allocation, recs, n, cps, seed, 0, replicates)
    with ThreadPoolExecutor(max_workers=len(pieces)) as pool:
        futures = [
            pool.submit(batch, instance, allocation, recs, n, cps, seed, r0, size)
            for r0, size in pieces
        ]
        results = [f.result() for f in futures]
    values = [
        [np.concatenate([res[0][ri][ci] for res in results]) for ci in range(len(cps))]
        for ri in range(len(recs))
    ]
    cumulative = [np.concatenate([res[1][ci] for res in results]) for ci in range(len(cps))]
    return values, cumulative


def estimate_curves(
    instance: BanditInstance,
    allocation: AllocationStrategy,
    recommendations,
    checkpoints,
    replicates: int,
    seed: int,
    *,
    threads: int = 1,
    engine: str = "auto",
) -> list[CurveEstimate]:
    """Estimate several recommendations from one simulation pass.

    All recommendations share the same replicate streams (replicate ``r``
    uses ``RngStream(seed, r)``), so the returned curves are mutually
    consistent and identical to running each recommendation alone.
    """
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    n = max(checkpoints)
    cps = _validate_checkpoints(checkpoints, n)
    recs = list(recommendations)
    if engine == "auto":
        engine = "vector"
    if engine not in ("vector", "sequential"):
        raise ValueError(f"unknown engine {engine!r}")
    for rec in recs:
        if isinstance(rec, Eba) and rec.round_policy == FLOOR_MULTIPLE_OF_K:
            _eba_floor_round(cps[0], instance.k)
    values, cumulative = _run_batches(
        instance, allocation, recs, n, cps, seed, replicates, threads, engine
    )
    return [_aggregate(values[ri], cumulative, cps, replicates) for ri in range(len(recs))]


def estimate_curve(
    instance: BanditInstance,
    allocation: AllocationStrategy,
    recommendation: RecommendationStrategy,
    checkpoints,
    replicates: int,
    seed: int,
    *,
    threads: int = 1,
    engine: str = "auto",
) -> CurveEstimate:
    """Monte-Carlo estimate of the expected simple regret curve of one pair."""
    return estimate_curves(
        instance,
        allocation,
        [recommendation],
        checkpoints,
        replicates,
        seed,
        threads=threads,
        engine=engine,
    )[0]


# ---------------------------------------------------------------------------
# Exact oracle.
# ---------------------------------------------------------------------------


class _Stats:
    """Aggregated history view (per-arm counts and sums) for the strategies."""

    __slots__ = ("k", "counts", "sums", "n")

    def __init__(self, k, counts, sums, n):
        self.k = k
        self.counts = counts
        self.sums = sums
        self.n = n


def _oracle_recommend_value(instance, recommendation, counts, sums, n) -> float:
    stats = _Stats(instance.k, list(counts), list(sums), n)
    if isinstance(recommendation, Edp):
        rec = Recommendation.mixture(c / n for c in counts)
    elif isinstance(recommendation, Mpa):
        rec = mpa_recommend(stats)
    else:
        rec = _eba_from_stats(stats)
    return expected_simple_regret(instance, rec)


def _exact_outcomes(arm) -> list[tuple[float, Fraction]]:
    """Branch (reward, probability) pairs with exact rational probabilities.

    Bernoulli complements are taken in rational arithmetic (1 - Fraction(p)),
    so each branch list sums to exactly 1 and the enumerated expectation is
    the exact rational expectation of the float-valued leaves.
    """
    if isinstance(arm, Dirac):
        return [(arm.v, Fraction(1))]
    if isinstance(arm, Bernoulli):
        p = Fraction(arm.p)
        out = []
        if arm.p < 1.0:
            out.append((0.0, 1 - p))
        if arm.p > 0.0:
            out.append((1.0, p))
        return out
    raise ValueError(
        f"exact oracle supports Bernoulli and Dirac arms only, got {type(arm).__name__}"
    )


def _exact_enumerate(instance, allocation, recommendation, n, budget):
    """Return (expected simple regret, total leaf probability, states expanded).

    The expectation is accumulated in exact rational arithmetic and rounded
    to float once, so a recommendation whose value is the same at every leaf
    enumerates to that value bitwise. Strategy decisions along the tree use
    ordinary float statistics, exactly as in simulation.
    """
    k = instance.k
    outcome_lists = [_exact_outcomes(arm) for arm in instance.arms]
    memo: dict[tuple, tuple[Fraction, Fraction]] = {}

    def visit(t, counts, sums):
        if t == n + 1:
            leaf = _oracle_recommend_value(instance, recommendation, counts, sums, n)
            return Fraction(leaf), Fraction(1)
        key = (t, counts, sums)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if len(memo) >= budget:
            raise OracleBudgetError(
                f"exact enumeration exceeded the budget of {budget} states"
            )
        stats = _Stats(k, list(counts), list(sums), t - 1)
        arm = allocate(allocation, stats, t)
        i = arm - 1
        value = Fraction(0)
        mass = Fraction(0)
        for reward, p in outcome_lists[i]:
            next_counts = counts[:i] + (counts[i] + 1,) + counts[i + 1 :]
            next_sums = sums[:i] + (sums[i] + reward,) + sums[i + 1 :]
            child_value, child_mass = visit(t + 1, next_counts, next_sums)
            value += p * child_value
            mass += p * child_mass
        memo[key] = (value, mass)
        return value, mass

    value, mass = visit(1, (0,) * k, (0.0,) * k)
    return float(value), float(mass), len(memo)


def _oracle_effective_horizon(recommendation, n: int, k: int) -> int:
    if isinstance(recommendation, Eba) and recommendation.round_policy == FLOOR_MULTIPLE_OF_K:
        return _eba_floor_round(n, k)
    return n


def exact_expected_simple_regret(
    instance: BanditInstance,
    allocation: AllocationStrategy,
    recommendation: RecommendationStrategy,
    n: int,
    *,
    budget: int = 2**20,
) -> float:
    """Exact E[simple regret at round n] by outcome enumeration.

    Supports Bernoulli and Dirac arms. EDP is scored by its exact expected
    gap; the EBA floor policy at round n equals the current-round policy at
    round K*floor(n/K), so the enumeration runs to that round.
    """
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    horizon = _oracle_effective_horizon(recommendation, n, instance.k)
    value, _, _ = _exact_enumerate(instance, allocation, recommendation, horizon, budget)
    return value


def exact_oracle_diagnostics(
    instance: BanditInstance,
    allocation: AllocationStrategy,
    recommendation: RecommendationStrategy,
    n: int,
    *,
    budget: int = 2**20,
) -> tuple[float, float, int]:
    """(value, total leaf probability mass, states expanded) for the oracle."""
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    horizon = _oracle_effective_horizon(recommendation, n, instance.k)
    return _exact_enumerate(instance, allocation, recommendation, horizon, budget)
