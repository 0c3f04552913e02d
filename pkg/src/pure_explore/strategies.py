"""Allocation and recommendation strategies.

Two allocation rules choose the arm to pull each round:

* ``Unif`` cycles through the arms 1, 2, ..., K, 1, 2, ...
* ``Ucb(alpha)`` pulls the arm with the highest index
  ``mean_i + sqrt(alpha * ln(t) / T_i(t-1))``, with an infinite index for
  arms never pulled; requires ``alpha > 1``.

Three recommendation rules turn history into a final choice: EDP recommends
arm i with probability ``T_i(n)/n``, EBA the best empirical mean among
pulled arms, MPA the most played arm.

Everything here is a pure function of the history and its parameters. All
ties break to the smallest arm index. Strategies read the history only
through per-arm counts and reward sums (plus the round number), which is
what lets the exact oracle enumerate over aggregated states; the one
exception is EBA's floor policy, which truncates the chronological record
to the first ``K * floor(n/K)`` rounds before computing means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

from .core import History, Recommendation

__all__ = [
    "Unif",
    "Ucb",
    "Edp",
    "Eba",
    "Mpa",
    "AllocationStrategy",
    "RecommendationStrategy",
    "CURRENT_ROUND",
    "FLOOR_MULTIPLE_OF_K",
    "unif_allocate",
    "ucb_index",
    "ucb_allocate",
    "edp_recommend",
    "eba_recommend",
    "mpa_recommend",
    "allocate",
    "recommend",
]

CURRENT_ROUND = "current_round"
FLOOR_MULTIPLE_OF_K = "floor_multiple_of_K"


class ArmStats(Protocol):
    """What the index-based rules need from a history."""

    k: int
    counts: list[int]
    sums: list[float]

    @property
    def n(self) -> int: ...


@dataclass(frozen=True)
class Unif:
    name = "unif"

    def label(self) -> str:
        return "unif"


@dataclass(frozen=True)
class Ucb:
    alpha: float
    name = "ucb"

    def __post_init__(self) -> None:
        if not self.alpha > 1.0:
            raise ValueError(f"UCB exploration factor must exceed 1, got {self.alpha}")

    def label(self) -> str:
        return f"ucb({self.alpha:g})"


@dataclass(frozen=True)
class Edp:
    name = "edp"

    def label(self) -> str:
        return "edp"


@dataclass(frozen=True)
class Eba:
    round_policy: str = CURRENT_ROUND
    name = "eba"

    def __post_init__(self) -> None:
        if self.round_policy not in (CURRENT_ROUND, FLOOR_MULTIPLE_OF_K):
            raise ValueError(f"unknown EBA round policy {self.round_policy!r}")

    def label(self) -> str:
        return "eba" if self.round_policy == CURRENT_ROUND else "eba_floor"


@dataclass(frozen=True)
class Mpa:
    name = "mpa"

    def label(self) -> str:
        return "mpa"


AllocationStrategy = Unif | Ucb
RecommendationStrategy = Edp | Eba | Mpa


def unif_allocate(t: int, k: int) -> int:
    """Arm pulled by the uniform cycle at round ``t`` (1-based).

    ``t mod K`` with residue 0 mapped to arm K, so the cycle is 1, ..., K.
    """
    if t < 1:
        raise ValueError(f"round index must be >= 1, got {t}")
    if k < 2:
        raise ValueError(f"need at least 2 arms, got {k}")
    return (t - 1) % k + 1


def ucb_index(history: ArmStats, arm: int, t: int, alpha: float) -> float:
    """Upper confidence index of ``arm`` at round ``t``.

    ``history`` must reflect rounds 1..t-1. Returns +inf while the arm has
    never been pulled, otherwise the empirical mean plus
    ``sqrt(alpha * ln(t) / T_i(t-1))`` (natural log).
    """
    t_i = history.counts[arm - 1]
    if t_i == 0:
        return math.inf
    return history.sums[arm - 1] / t_i + math.sqrt(alpha * math.log(t) / t_i)


def ucb_allocate(history: ArmStats, t: int, alpha: float) -> int:
    """Smallest arm index attaining the maximal upper confidence index."""
    best_arm = 1
    best = -math.inf
    for arm in range(1, history.k + 1):
        b = ucb_index(history, arm, t, alpha)
        if b > best:
            best = b
            best_arm = arm
    return best_arm


def edp_recommend(history: ArmStats) -> Recommendation:
    """Probability vector proportional to the pull counts."""
    n = history.n
    if n < 1:
        raise ValueError("cannot recommend from an empty history")
    return Recommendation.mixture(t_i / n for t_i in history.counts)


def eba_recommend(history: History, round_policy: str = CURRENT_ROUND) -> Recommendation:
    """Smallest arm index with the best empirical mean among pulled arms.

    The floor policy recomputes the means over the first ``K * floor(n/K)``
    rounds only, so every arm average has the same number of terms under the
    uniform allocation.
    """
    if round_policy == FLOOR_MULTIPLE_OF_K:
        history = history.truncated(history.k * (history.n // history.k))
    return _eba_from_stats(history)


def _eba_from_stats(history: ArmStats) -> Recommendation:
    best_arm = 0
    best = -math.inf
    for i in range(history.k):
        if history.counts[i] == 0:
            continue
        mean = history.sums[i] / history.counts[i]
        if mean > best:
            best = mean
            best_arm = i + 1
    if best_arm == 0:
        raise ValueError("no arm has ever been pulled")
    return Recommendation.single(best_arm)


def mpa_recommend(history: ArmStats) -> Recommendation:
    """Smallest arm index with the largest pull count."""
    if history.n < 1:
        raise ValueError("cannot recommend from an empty history")
    best_arm = 1
    best = -1
    for i in range(history.k):
        if history.counts[i] > best:
            best = history.counts[i]
            best_arm = i + 1
    return Recommendation.single(best_arm)


def allocate(strategy: AllocationStrategy, history: ArmStats, t: int) -> int:
    if isinstance(strategy, Unif):
        return unif_allocate(t, history.k)
    return ucb_allocate(history, t, strategy.alpha)


def recommend(strategy: RecommendationStrategy, history: History) -> Recommendation:
    if isinstance(strategy, Edp):
        return edp_recommend(history)
    if isinstance(strategy, Eba):
        return eba_recommend(history, strategy.round_policy)
    return mpa_recommend(history)
