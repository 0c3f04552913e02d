"""Closed-form upper and lower bounds on the expected simple regret.

Each evaluator returns a :class:`BoundValue`: the formula value together
with a flag telling whether the bound's stated precondition on ``n`` holds.
Values are computed even when the precondition fails (curve overlays need
them across regime thresholds); callers must treat ``valid=False`` points as
decoration only. Values above 1 are returned raw, never clamped.

All logarithms are natural; floors are toward zero. Bounds that depend on
the gap structure reject instances in which every arm is optimal (the
minimal positive gap is undefined there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import BanditInstance

__all__ = [
    "BoundValue",
    "unif_eba_bound_sum",
    "unif_eba_bound_mcdiarmid",
    "unif_eba_df_bound",
    "ucb_mpa_dd_bound",
    "ucb_mpa_df_bound",
    "ucb_mpa_weighted_bound",
    "ucb_mpa_beta_bound",
    "edp_df_bound",
    "ucb_eba_bound",
    "lower_bound_df",
    "lower_bound_dd_shape",
    "lower_bound_ucb_shape",
]


@dataclass(frozen=True)
class BoundValue:
    value: float
    valid: bool
    precondition: str

    def __post_init__(self) -> None:
        if self.value < 0.0:
            raise ValueError(f"bound value must be nonnegative, got {self.value}")


def _delta_min(instance: BanditInstance) -> float:
    if instance.delta_min is None:
        raise ValueError("all arms share the best mean; gap-based bounds are undefined")
    return instance.delta_min


def _check_alpha(alpha: float) -> None:
    if not alpha > 1.0:
        raise ValueError(f"exploration factor must exceed 1, got {alpha}")


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")


def _decay_term(base: float, alpha: float) -> float:
    """base^(2(1-alpha)) with base <= 0 mapped to +inf.

    The count-threshold bounds only make sense once their base count exceeds
    1; below that the formula is infinite (base 0) or undefined (base < 0),
    and such points are always flagged invalid.
    """
    if base <= 0.0:
        return math.inf
    return base ** (2.0 * (1.0 - alpha))


def unif_eba_bound_sum(instance: BanditInstance, n: int) -> BoundValue:
    """Per-arm Hoeffding sum for uniform allocation + empirical best arm.

    sum over suboptimal arms of gap_i * exp(-gap_i^2 * floor(n/K)).
    Valid for n >= K; the recommendation is taken at round K*floor(n/K).
    """
    _check_n(n)
    _delta_min(instance)
    k = instance.k
    m = n // k
    value = math.fsum(g * math.exp(-g * g * m) for g in instance.gaps if g > 0.0)
    return BoundValue(value, n >= k, f"n >= K (= {k})")


def unif_eba_bound_mcdiarmid(instance: BanditInstance, n: int, eta: float) -> BoundValue:
    """Bounded-differences bound for uniform allocation + empirical best arm.

    (max gap) * exp(-(1-eta)^2/2 * floor(n/K) * delta^2) for eta in (0, 1),
    valid once n >= max(K, K*ln(K)/(eta^2 * delta^2)).
    """
    _check_n(n)
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in the open interval (0, 1), got {eta}")
    delta = _delta_min(instance)
    k = instance.k
    m = n // k
    value = max(instance.gaps) * math.exp(-((1.0 - eta) ** 2) / 2.0 * m * delta * delta)
    threshold = max(k, k * math.log(k) / (eta * eta * delta * delta))
    return BoundValue(value, n >= threshold, f"n >= max(K, K ln K / (eta^2 delta^2)) (= {threshold:g})")


def unif_eba_df_bound(k: int, n: int) -> BoundValue:
    """Distribution-free bound for uniform allocation + empirical best arm.

    2*sqrt(K*ln(K)/(n+K)); holds for every instance, any n >= 1.
    """
    if k < 2:
        raise ValueError(f"need at least 2 arms, got {k}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    value = 2.0 * math.sqrt(k * math.log(k) / (n + k))
    return BoundValue(value, True, "always")


def _ucb_mpa_dd_threshold(k: int, alpha: float, delta: float, n: int) -> bool:
    return n >= k + 4.0 * k * alpha * math.log(n) / (delta * delta) and n >= k * (k + 2)


def ucb_mpa_dd_bound(instance: BanditInstance, n: int, alpha: float) -> BoundValue:
    """Distribution-dependent bound for UCB(alpha) + most played arm.

    K/(alpha-1) * (n/K - 1)^(2(1-alpha)); the rate is gap-free but the bound
    only holds once n >= K + 4*K*alpha*ln(n)/delta^2 and n >= K(K+2).
    """
    _check_n(n)
    _check_alpha(alpha)
    delta = _delta_min(instance)
    k = instance.k
    value = k / (alpha - 1.0) * _decay_term(n / k - 1.0, alpha)
    valid = _ucb_mpa_dd_threshold(k, alpha, delta, n)
    return BoundValue(value, valid, "n >= K + 4 K alpha ln(n) / delta^2 and n >= K(K+2)")


def ucb_mpa_df_bound(k: int, n: int, alpha: float) -> BoundValue:
    """Distribution-free bound for UCB(alpha) + most played arm.

    sqrt(4*K*alpha*ln(n)/(n-K)) + K/(alpha-1)*(n/K-1)^(2(1-alpha)),
    valid for n >= K(K+2).
    """
    _check_alpha(alpha)
    if n <= k:
        raise ValueError(f"n must exceed K, got n={n}, K={k}")
    value = math.sqrt(4.0 * k * alpha * math.log(n) / (n - k)) + k / (
        alpha - 1.0
    ) * _decay_term(n / k - 1.0, alpha)
    return BoundValue(value, n >= k * (k + 2), f"n >= K(K+2) (= {k * (k + 2)})")


def ucb_mpa_weighted_bound(
    instance: BanditInstance, n: int, alpha: float, a: list[float] | tuple[float, ...]
) -> BoundValue:
    """Weighted count-threshold bound for UCB(alpha) + most played arm.

    For nonnegative weights a_i summing to 1 with a_i <= a_j whenever arm i
    is suboptimal and arm j optimal:
    1/(alpha-1) * sum over suboptimal i of (a_i*n - 1)^(2(1-alpha)).
    Valid once every suboptimal arm satisfies a_i*n >= 1 + 4*alpha*ln(n)/gap_i^2
    and a_i*n >= K+2. Uniform weights reproduce the distribution-dependent bound.
    """
    _check_n(n)
    _check_alpha(alpha)
    _delta_min(instance)
    k = instance.k
    a = tuple(float(x) for x in a)
    if len(a) != k:
        raise ValueError(f"weight vector has {len(a)} entries, instance has {k} arms")
    if any(x < 0.0 for x in a):
        raise ValueError("weights must be nonnegative")
    if abs(math.fsum(a) - 1.0) > 1e-12:
        raise ValueError(f"weights sum to {math.fsum(a)}, expected 1")
    min_optimal = min(a[i] for i in range(k) if instance.gaps[i] == 0.0)
    suboptimal = [i for i in range(k) if instance.gaps[i] > 0.0]
    if any(a[i] > min_optimal for i in suboptimal):
        raise ValueError("suboptimal-arm weights must not exceed any optimal-arm weight")
    value = 0.0
    valid = True
    for i in suboptimal:
        value += _decay_term(a[i] * n - 1.0, alpha)
        g = instance.gaps[i]
        if a[i] * n < 1.0 + 4.0 * alpha * math.log(n) / (g * g) or a[i] * n < k + 2:
            valid = False
    value /= alpha - 1.0
    return BoundValue(
        value, valid, "a_i n >= 1 + 4 alpha ln(n) / gap_i^2 and a_i n >= K+2 for all suboptimal i"
    )


def gap_weighted_beta(instance: BanditInstance) -> float:
    """Normalizer 1 / (K*/delta^2 + sum over suboptimal i of 1/gap_i^2).

    K* counts the optimal arms and delta is the minimal positive gap. Used by
    the gap-adapted weight choice a_i = beta/gap_i^2 (beta/delta^2 on optimal
    arms).
    """
    delta = _delta_min(instance)
    n_optimal = sum(1 for g in instance.gaps if g == 0.0)
    inv = n_optimal / (delta * delta) + math.fsum(
        1.0 / (g * g) for g in instance.gaps if g > 0.0
    )
    return 1.0 / inv


def ucb_mpa_beta_bound(instance: BanditInstance, n: int, alpha: float) -> BoundValue:
    """Gap-adapted weighted bound for UCB(alpha) + most played arm.

    With beta = gap_weighted_beta(instance):
    1/(alpha-1) * sum over suboptimal i of (beta*n/gap_i^2 - 1)^(2(1-alpha)),
    valid once n/ln(n) >= (4*alpha+1)/beta and n >= (K+2)*(max gap)^2/beta.
    """
    _check_n(n)
    _check_alpha(alpha)
    beta = gap_weighted_beta(instance)
    k = instance.k
    gap_max = max(instance.gaps)
    value = math.fsum(
        _decay_term(beta * n / (g * g) - 1.0, alpha) for g in instance.gaps if g > 0.0
    ) / (alpha - 1.0)
    log_n = math.log(n)
    ratio = math.inf if log_n == 0.0 else n / log_n
    valid = ratio >= (4.0 * alpha + 1.0) / beta and n >= (k + 2) * gap_max * gap_max / beta
    return BoundValue(
        value, valid, "n/ln(n) >= (4 alpha + 1)/beta and n >= (K+2) (max gap)^2 / beta"
    )


def edp_df_bound(k: int, n: int, alpha: float) -> BoundValue:
    """Distribution-free bound for UCB(alpha) + empirical distribution of plays.

    The expected simple regret of the play-proportional recommendation equals
    the expected cumulative regret over n, giving
    sqrt((4*alpha*ln(n) + 3/2 + 1/(2(alpha-1))) * K * n) / n.
    """
    _check_alpha(alpha)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    inner = (4.0 * alpha * math.log(n) + 1.5 + 1.0 / (2.0 * (alpha - 1.0))) * k * n
    return BoundValue(math.sqrt(inner) / n, True, "always")


def ucb_eba_bound(instance: BanditInstance, n: int, alpha: float, rho_alpha: float) -> BoundValue:
    """Bound for UCB(alpha) + empirical best arm.

    sum over suboptimal arms of (4/gap_i) * (1/n)^(rho_alpha * gap_i^2 / 2).
    ``rho_alpha`` is a positive constant depending only on alpha with no
    closed form; callers must supply it.
    """
    _check_n(n)
    _check_alpha(alpha)
    if not rho_alpha > 0.0:
        raise ValueError(f"rho_alpha must be positive, got {rho_alpha}")
    _delta_min(instance)
    value = math.fsum(
        4.0 / g * (1.0 / n) ** (rho_alpha * g * g / 2.0) for g in instance.gaps if g > 0.0
    )
    return BoundValue(value, True, "always (n >= 1)")


def lower_bound_df(k: int, n: int) -> float:
    """Distribution-free lower bound sqrt(K/n)/20 over all forecasters."""
    if k < 2:
        raise ValueError(f"need at least 2 arms, got {k}")
    if n < k:
        raise ValueError(f"requires n >= K, got n={n}, K={k}")
    return math.sqrt(k / n) / 20.0


def lower_bound_dd_shape(beta: float, gamma: float, n: int) -> float:
    """Parametric curve beta * exp(-gamma * n) for the exponential lower bound.

    The bound holds for some instance-dependent constants beta > 0 and
    gamma >= 0; this evaluates the shape for user-supplied constants.
    """
    if not beta > 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    return beta * math.exp(-gamma * n)


def lower_bound_ucb_shape(beta: float, gamma: float, alpha: float, n: int) -> float:
    """Parametric curve beta * n^(-gamma*alpha) for the polynomial lower bound.

    Applies to forecasters allocating with UCB(alpha); constants are
    instance-dependent and supplied by the caller.
    """
    if not beta > 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    return beta * n ** (-gamma * alpha)
