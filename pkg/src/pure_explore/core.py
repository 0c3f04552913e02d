"""Core domain types for finite-armed stochastic bandits.

Arms are reward distributions on [0, 1] with closed-form means. A
:class:`BanditInstance` is an ordered list of arms together with the derived
quantities used everywhere else: the best mean, the per-arm gaps and the
minimal positive gap. Arm indices are 1-based at every public interface;
internal arrays are 0-based.

Randomness goes through :class:`RngStream`, a counter-based generator: the
value of draw number ``c`` is a pure function of ``(seed, stream, c)``, so
replicate ``r`` of an experiment can always be given stream ``r`` and the
results do not depend on scheduling or platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Bernoulli",
    "Dirac",
    "Discrete",
    "ArmDistribution",
    "BanditInstance",
    "History",
    "Recommendation",
    "RngStream",
    "uniforms_for_streams",
    "sample_reward",
    "gaps",
    "expected_simple_regret",
    "cumulative_regret",
]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class Bernoulli:
    """Reward 1 with probability ``p``, else 0."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"Bernoulli parameter must lie in [0, 1], got {self.p}")

    @property
    def mean(self) -> float:
        return self.p

    def sample_from_uniform(self, u: float) -> float:
        return 1.0 if u < self.p else 0.0

    def sample_many(self, u: np.ndarray) -> np.ndarray:
        return np.where(u < self.p, 1.0, 0.0)

    def outcomes(self) -> list[tuple[float, float]]:
        """(value, probability) pairs with zero-probability branches dropped."""
        out = []
        if self.p < 1.0:
            out.append((0.0, 1.0 - self.p))
        if self.p > 0.0:
            out.append((1.0, self.p))
        return out


@dataclass(frozen=True)
class Dirac:
    """Deterministic reward ``v``."""

    v: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.v <= 1.0:
            raise ValueError(f"Dirac value must lie in [0, 1], got {self.v}")

    @property
    def mean(self) -> float:
        return self.v

    def sample_from_uniform(self, u: float) -> float:
        return self.v

    def sample_many(self, u: np.ndarray) -> np.ndarray:
        return np.full_like(u, self.v)

    def outcomes(self) -> list[tuple[float, float]]:
        return [(self.v, 1.0)]


@dataclass(frozen=True)
class Discrete:
    """Finite-support law given as (value, probability) pairs.

    Values must lie in [0, 1]; probabilities must be nonnegative and sum to 1
    within 1e-12. Sampling inverts the CDF in the listed support order.
    """

    support: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        support = tuple((float(v), float(p)) for v, p in self.support)
        object.__setattr__(self, "support", support)
        if not support:
            raise ValueError("Discrete support must be non-empty")
        total = 0.0
        for v, p in support:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"support value {v} outside [0, 1]")
            if p < 0.0:
                raise ValueError(f"negative probability {p}")
            total += p
        if abs(total - 1.0) > _PROB_TOL:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        cum = np.cumsum([p for _, p in support])
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "_values", np.array([v for v, _ in support]))

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.support)

    def sample_from_uniform(self, u: float) -> float:
        cum = self._cum  # type: ignore[attr-defined]
        for j in range(len(cum)):
            if u < cum[j]:
                return self.support[j][0]
        return self.support[-1][0]

    def sample_many(self, u: np.ndarray) -> np.ndarray:
        cum = self._cum  # type: ignore[attr-defined]
        idx = np.searchsorted(cum, u, side="right")
        idx = np.minimum(idx, len(cum) - 1)
        return self._values[idx]  # type: ignore[attr-defined]

    def outcomes(self) -> list[tuple[float, float]]:
        return [(v, p) for v, p in self.support if p > 0.0]


ArmDistribution = Bernoulli | Dirac | Discrete


class BanditInstance:
    """Ordered list of K >= 2 arms with derived gap structure.

    Attributes:
        arms: the arm distributions, position i holds arm i+1.
        means: closed-form mean of each arm.
        mu_star: max of the means.
        gaps: mu_star - mean_i per arm; min over arms is 0.
        delta_min: smallest positive gap, or None when every arm is optimal
            (an explicit flagged state, not an error).
        best_arm: smallest 1-based index attaining mu_star.
    """

    def __init__(self, arms: list[ArmDistribution] | tuple[ArmDistribution, ...]):
        arms = tuple(arms)
        if len(arms) < 2:
            raise ValueError(f"need at least 2 arms, got {len(arms)}")
        self.arms = arms
        self.means = tuple(a.mean for a in arms)
        self.mu_star = max(self.means)
        self.gaps = tuple(self.mu_star - m for m in self.means)
        positive = [g for g in self.gaps if g > 0.0]
        self.delta_min = min(positive) if positive else None
        self.best_arm = 1 + self.means.index(self.mu_star)

    @property
    def k(self) -> int:
        return len(self.arms)

    @property
    def all_optimal(self) -> bool:
        return self.delta_min is None

    def __repr__(self) -> str:
        return f"BanditInstance(means={self.means})"


class History:
    """Pull record of one episode. Single-writer; never shared across episodes.

    Keeps the chronological (round, arm, reward) list plus per-arm counts,
    reward sums and reward sequences. Sums accumulate in pull order.
    """

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k
        self.pulls: list[tuple[int, int, float]] = []
        self.counts = [0] * k
        self.sums = [0.0] * k
        self.per_arm_rewards: list[list[float]] = [[] for _ in range(k)]

    @property
    def n(self) -> int:
        return len(self.pulls)

    def record(self, arm: int, reward: float) -> None:
        """Append one pull of 1-based ``arm`` with its observed reward."""
        if not 1 <= arm <= self.k:
            raise ValueError(f"arm {arm} outside 1..{self.k}")
        self.pulls.append((self.n + 1, arm, reward))
        i = arm - 1
        self.counts[i] += 1
        self.sums[i] += reward
        self.per_arm_rewards[i].append(reward)

    def truncated(self, m: int) -> "History":
        """History of the first ``m`` pulls (used by the EBA floor policy)."""
        if not 0 <= m <= self.n:
            raise ValueError(f"cannot truncate length-{self.n} history to {m}")
        h = History(self.k)
        for _, arm, reward in self.pulls[:m]:
            h.record(arm, reward)
        return h


@dataclass(frozen=True)
class Recommendation:
    """Either a single 1-based arm or a probability vector over arms.

    Exactly one of ``arm`` / ``distribution`` is set. Probability entries
    must be nonnegative and sum to 1 within 1e-12.
    """

    arm: int | None = None
    distribution: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if (self.arm is None) == (self.distribution is None):
            raise ValueError("set exactly one of arm / distribution")
        if self.arm is not None and self.arm < 1:
            raise ValueError(f"arm index must be >= 1, got {self.arm}")
        if self.distribution is not None:
            dist = tuple(float(p) for p in self.distribution)
            object.__setattr__(self, "distribution", dist)
            if any(p < 0.0 for p in dist):
                raise ValueError("negative probability in recommendation")
            total = math.fsum(dist)
            if abs(total - 1.0) > _PROB_TOL:
                raise ValueError(f"recommendation probabilities sum to {total}")

    @classmethod
    def single(cls, arm: int) -> "Recommendation":
        return cls(arm=arm)

    @classmethod
    def mixture(cls, probs) -> "Recommendation":
        return cls(distribution=tuple(probs))


# ---------------------------------------------------------------------------
# Counter-based RNG.
#
# One 64-bit output is a pure function of (seed, stream, counter), built from
# three chained SplitMix64 finalizers. Identical code paths exist in scalar
# Python (masked ints) and vectorized numpy (uint64 wraps mod 2^64), and both
# produce identical bits; tests assert this.
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_M1 = 0xBF58476D1CE4E5B9
_SM_M2 = 0x94D049BB133111EB


def _splitmix64(z: int) -> int:
    z = (z + _SM_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _SM_M1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM_M2) & _MASK64
    return z ^ (z >> 31)


def _mix(seed: int, stream: int, counter: int) -> int:
    return _splitmix64(seed ^ _splitmix64(stream ^ _splitmix64(counter)))


def _splitmix64_np(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_SM_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_SM_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_SM_M2)
    return z ^ (z >> np.uint64(31))


def uniforms_for_streams(seed: int, streams: np.ndarray, counter: int) -> np.ndarray:
    """Draw number ``counter`` of each stream, as float64 in [0, 1).

    Vectorized twin of ``RngStream.uniform``; bitwise identical outputs.
    """
    s = np.asarray(streams, dtype=np.uint64)
    bits = _splitmix64_np(
        np.uint64(seed & _MASK64)
        ^ _splitmix64_np(s ^ np.uint64(_splitmix64(counter & _MASK64)))
    )
    return (bits >> np.uint64(11)) * 2.0**-53


@dataclass
class RngStream:
    """Counter-based uniform stream identified by (seed, stream).

    Draw ``c`` is a pure function of (seed, stream, c): the stream can be
    replayed, split per replicate, or evaluated out of order without any
    shared state.
    """

    seed: int
    stream: int = 0
    counter: int = field(default=0)

    def uniform(self) -> float:
        """Next float64 in [0, 1); consumes one counter position."""
        bits = _mix(self.seed & _MASK64, self.stream & _MASK64, self.counter & _MASK64)
        self.counter += 1
        return (bits >> 11) * 2.0**-53


# ---------------------------------------------------------------------------
# Operations.
# ---------------------------------------------------------------------------


def sample_reward(arm: ArmDistribution, rng: RngStream) -> float:
    """Draw one reward from ``arm``.

    Always consumes exactly one uniform, whatever the arm kind, so parallel
    replicates stay stream-aligned across instances that mix deterministic
    and stochastic arms.
    """
    return arm.sample_from_uniform(rng.uniform())


def gaps(instance: BanditInstance) -> tuple[float, tuple[float, ...], float | None]:
    """Return (mu_star, per-arm gaps, minimal positive gap or None)."""
    return instance.mu_star, instance.gaps, instance.delta_min


def expected_simple_regret(instance: BanditInstance, rec: Recommendation) -> float:
    """Gap of the recommended arm; for a mixture, the expected gap.

    A single arm J scores gap_J. A probability vector p scores
    sum_i p_i * gap_i, accumulated in arm order.
    """
    if rec.arm is not None:
        if rec.arm > instance.k:
            raise ValueError(f"arm {rec.arm} outside 1..{instance.k}")
        return instance.gaps[rec.arm - 1]
    dist = rec.distribution
    assert dist is not None
    if len(dist) != instance.k:
        raise ValueError(f"recommendation has {len(dist)} entries, instance has {instance.k} arms")
    total = 0.0
    for p, g in zip(dist, instance.gaps):
        total += p * g
    return total


def cumulative_regret(instance: BanditInstance, history: History) -> float:
    """Sum over arms of pull count times gap, accumulated in arm order.

    Equals the round-by-round sum of instantaneous gaps; the arm-order form
    is the canonical one (bitwise reproducible for a given history).
    """
    if history.k != instance.k:
        raise ValueError(f"history has {history.k} arms, instance has {instance.k}")
    total = 0.0
    for t_i, g in zip(history.counts, instance.gaps):
        total += t_i * g
    return total
