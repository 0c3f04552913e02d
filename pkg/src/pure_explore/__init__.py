"""Pure-exploration bandit toolkit.

Finite-armed simple/cumulative regret machinery (allocation and
recommendation strategies, Monte-Carlo curve estimation, an exact
enumeration oracle), closed-form bound evaluators, and a regime-based
explorer for continuum-armed problems. See the README for the CLI.
"""

from .core import (
    BanditInstance,
    Bernoulli,
    Dirac,
    Discrete,
    History,
    Recommendation,
    RngStream,
    cumulative_regret,
    expected_simple_regret,
    gaps,
    sample_reward,
)
from .simulator import (
    CurveEstimate,
    EpisodeResult,
    OracleBudgetError,
    default_checkpoints,
    estimate_curve,
    estimate_curves,
    exact_expected_simple_regret,
    run_episode,
)
from .strategies import (
    Eba,
    Edp,
    Mpa,
    Ucb,
    Unif,
    eba_recommend,
    edp_recommend,
    mpa_recommend,
    ucb_allocate,
    ucb_index,
    unif_allocate,
)

__version__ = "0.1.0"

__all__ = [
    "BanditInstance",
    "Bernoulli",
    "Dirac",
    "Discrete",
    "History",
    "Recommendation",
    "RngStream",
    "cumulative_regret",
    "expected_simple_regret",
    "gaps",
    "sample_reward",
    "CurveEstimate",
    "EpisodeResult",
    "OracleBudgetError",
    "default_checkpoints",
    "estimate_curve",
    "estimate_curves",
    "exact_expected_simple_regret",
    "run_episode",
    "Eba",
    "Edp",
    "Mpa",
    "Ucb",
    "Unif",
    "eba_recommend",
    "edp_recommend",
    "mpa_recommend",
    "ucb_allocate",
    "ucb_index",
    "unif_allocate",
    "__version__",
]
