"""Experiment runner: reproducible CSV output for simulation, bounds,
exact-oracle evaluation and continuum-armed exploration.

Subcommands
-----------
simulate   Monte-Carlo estimates of expected simple/cumulative regret for
           every configured (allocation, recommendation) pair at each
           checkpoint.
bounds     Closed-form bound values with validity flags, one row per
           (bound, n).
oracle     Exact expected simple regret by outcome enumeration.
xarmed     Regime-based exploration of a continuous arm space.

``simulate``, ``bounds`` and ``oracle`` read a TOML config (see
``parse_config``); ``xarmed`` is configured by flags. Seeds are mandatory
everywhere and never auto-generated. ``--threads`` (fallback: environment
variable PURE_EXPLORE_THREADS) splits replicates across worker threads and
never changes any output byte.

Floats are written with 17 significant digits, so CSV values round-trip to
the exact binary doubles.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bounds as bounds_mod
from .continuous import BERNOULLI, DETERMINISTIC, estimate_xarmed_curve, tent_environment
from .core import BanditInstance, Bernoulli, Dirac, Discrete
from .simulator import (
    default_checkpoints,
    estimate_curves,
    exact_expected_simple_regret,
)
from .strategies import CURRENT_ROUND, FLOOR_MULTIPLE_OF_K, Eba, Edp, Mpa, Ucb, Unif

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "StrategyPair",
    "InstanceSpec",
    "BoundsParams",
    "parse_config",
    "serialize_config",
    "build_instance",
    "a2_scenario_arms",
    "run_simulate",
    "run_bounds",
    "run_oracle",
    "run_xarmed",
    "main",
]

SIMULATE_HEADER = [
    "scenario_id",
    "allocation",
    "recommendation",
    "n",
    "replicates",
    "mean_simple_regret",
    "std_error",
    "mean_cumulative_regret",
]
BOUNDS_HEADER = ["scenario_id", "bound", "n", "value", "valid"]
ORACLE_HEADER = ["scenario_id", "allocation", "recommendation", "n", "value", "method"]
XARMED_HEADER = [
    "scenario_id",
    "env",
    "noise",
    "n",
    "replicates",
    "mean_simple_regret",
    "std_error",
    "mean_cumulative_regret",
]


class ConfigError(ValueError):
    """Configuration document rejected; message names the offending field."""


@dataclass(frozen=True)
class InstanceSpec:
    """Instance description as written in the config: explicit arm records
    or the one-optimal / one-gap / rest-two-gaps Bernoulli generator."""

    kind: str
    arms: tuple[tuple, ...] | None = None
    k: int | None = None
    delta: float | None = None
    mu_star: float | None = None


@dataclass(frozen=True)
class StrategyPair:
    allocation: str
    recommendation: str
    alpha: float | None = None
    eba_floor: bool = False


@dataclass(frozen=True)
class BoundsParams:
    alpha: float
    eta: float | None = None
    rho_alpha: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    scenario_id: str
    seed: int
    horizon: int
    replicates: int
    checkpoints: tuple[int, ...]
    instance: InstanceSpec
    strategies: tuple[StrategyPair, ...]
    bounds: BoundsParams | None = None
    output: str | None = None
    oracle_budget: int = 2**20


def _require(table: dict, key: str, kind, where: str):
    if key not in table:
        raise ConfigError(f"{where}: missing required key '{key}'")
    value = table[key]
    if not isinstance(value, kind) or (isinstance(value, bool) and kind is not bool):
        names = "/".join(k.__name__ for k in (kind if isinstance(kind, tuple) else (kind,)))
        raise ConfigError(f"{where}: key '{key}' must be of type {names}")
    return value


def _reject_unknown(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")


def _parse_arm(record: dict, where: str) -> tuple:
    if "type" not in record:
        raise ConfigError(f"{where}: arm record needs a 'type'")
    kind = record["type"]
    if kind == "bernoulli":
        _reject_unknown(record, {"type", "p"}, where)
        return ("bernoulli", float(_require(record, "p", (int, float), where)))
    if kind == "dirac":
        _reject_unknown(record, {"type", "v"}, where)
        return ("dirac", float(_require(record, "v", (int, float), where)))
    if kind == "discrete":
        _reject_unknown(record, {"type", "support"}, where)
        support = _require(record, "support", list, where)
        pairs = []
        for entry in support:
            if not isinstance(entry, list) or len(entry) != 2:
                raise ConfigError(f"{where}: discrete support entries must be [value, prob] pairs")
            pairs.append((float(entry[0]), float(entry[1])))
        return ("discrete", tuple(pairs))
    raise ConfigError(f"{where}: unknown arm type {kind!r}")


def _parse_instance(table: dict) -> InstanceSpec:
    where = "[instance]"
    kind = _require(table, "kind", str, where)
    if kind == "explicit":
        _reject_unknown(table, {"kind", "arms"}, where)
        arms = _require(table, "arms", list, where)
        if len(arms) < 2:
            raise ConfigError(f"{where}: need at least 2 arms, got {len(arms)}")
        return InstanceSpec(kind="explicit", arms=tuple(_parse_arm(a, where) for a in arms))
    if kind == "a2-scenario":
        _reject_unknown(table, {"kind", "k", "delta", "mu_star"}, where)
        k = _require(table, "k", int, where)
        delta = float(_require(table, "delta", (int, float), where))
        mu_star = float(_require(table, "mu_star", (int, float), where))
        a2_scenario_arms(k, delta, mu_star)  # validate eagerly
        return InstanceSpec(kind="a2-scenario", k=k, delta=delta, mu_star=mu_star)
    raise ConfigError(f"{where}: unknown instance kind {kind!r}")


def _parse_strategy(table: dict, where: str) -> StrategyPair:
    _reject_unknown(table, {"allocation", "recommendation", "alpha", "eba_floor"}, where)
    allocation = _require(table, "allocation", str, where)
    recommendation = _require(table, "recommendation", str, where)
    if allocation not in ("unif", "ucb"):
        raise ConfigError(f"{where}: unknown allocation {allocation!r}")
    if recommendation not in ("edp", "eba", "mpa"):
        raise ConfigError(f"{where}: unknown recommendation {recommendation!r}")
    alpha = table.get("alpha")
    if allocation == "ucb":
        if alpha is None:
            raise ConfigError(f"{where}: allocation 'ucb' requires 'alpha'")
        alpha = float(alpha)
        if not alpha > 1.0:
            raise ConfigError(f"{where}: 'alpha' must exceed 1, got {alpha}")
    elif alpha is not None:
        raise ConfigError(f"{where}: 'alpha' only applies to the 'ucb' allocation")
    eba_floor = table.get("eba_floor", False)
    if not isinstance(eba_floor, bool):
        raise ConfigError(f"{where}: 'eba_floor' must be a boolean")
    if eba_floor and recommendation != "eba":
        raise ConfigError(f"{where}: 'eba_floor' only applies to the 'eba' recommendation")
    return StrategyPair(allocation, recommendation, alpha, eba_floor)


def _parse_bounds(table: dict) -> BoundsParams:
    where = "[bounds]"
    _reject_unknown(table, {"alpha", "eta", "rho_alpha"}, where)
    alpha = float(_require(table, "alpha", (int, float), where))
    eta = table.get("eta")
    rho = table.get("rho_alpha")
    return BoundsParams(
        alpha=alpha,
        eta=None if eta is None else float(eta),
        rho_alpha=None if rho is None else float(rho),
    )


_TOP_KEYS = {
    "scenario_id",
    "seed",
    "horizon",
    "replicates",
    "checkpoints",
    "instance",
    "strategies",
    "bounds",
    "output",
    "oracle_budget",
}


def parse_config(document: str) -> ExperimentConfig:
    """Parse and validate a TOML experiment description.

    Unknown keys anywhere are rejected. Seeds are mandatory. Checkpoints
    must be strictly increasing and lie in 1..horizon; when omitted they
    default to the geometric grid 1, 2, 4, ... plus the horizon.
    """
    try:
        raw = tomllib.loads(document)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"not valid TOML: {exc}") from exc
    _reject_unknown(raw, _TOP_KEYS, "config")
    scenario_id = _require(raw, "scenario_id", str, "config")
    seed = _require(raw, "seed", int, "config")
    horizon = _require(raw, "horizon", int, "config")
    if horizon < 1:
        raise ConfigError(f"config: 'horizon' must be >= 1, got {horizon}")
    replicates = _require(raw, "replicates", int, "config")
    if replicates < 1:
        raise ConfigError(f"config: 'replicates' must be >= 1, got {replicates}")
    if "checkpoints" in raw:
        cps = raw["checkpoints"]
        if not isinstance(cps, list) or not all(
            isinstance(c, int) and not isinstance(c, bool) for c in cps
        ):
            raise ConfigError("config: 'checkpoints' must be a list of integers")
        if sorted(set(cps)) != cps or not cps:
            raise ConfigError("config: 'checkpoints' must be non-empty and strictly increasing")
        if cps[0] < 1 or cps[-1] > horizon:
            raise ConfigError(f"config: checkpoints must lie in 1..{horizon}")
        checkpoints = tuple(cps)
    else:
        checkpoints = default_checkpoints(horizon)
    instance = _parse_instance(_require(raw, "instance", dict, "config"))
    strategies_raw = _require(raw, "strategies", list, "config")
    if not strategies_raw:
        raise ConfigError("config: need at least one [[strategies]] entry")
    strategies = tuple(
        _parse_strategy(s, f"[[strategies]] #{i + 1}") for i, s in enumerate(strategies_raw)
    )
    bounds = _parse_bounds(raw["bounds"]) if "bounds" in raw else None
    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("config: 'output' must be a string path")
    budget = raw.get("oracle_budget", 2**20)
    if not isinstance(budget, int) or budget < 1:
        raise ConfigError("config: 'oracle_budget' must be a positive integer")
    return ExperimentConfig(
        scenario_id=scenario_id,
        seed=seed,
        horizon=horizon,
        replicates=replicates,
        checkpoints=checkpoints,
        instance=instance,
        strategies=strategies,
        bounds=bounds,
        output=output,
        oracle_budget=budget,
    )


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(v)}")


def serialize_config(config: ExperimentConfig) -> str:
    """Render a config back to TOML; parse(serialize(c)) == c."""
    lines = [
        f"scenario_id = {_toml_value(config.scenario_id)}",
        f"seed = {config.seed}",
        f"horizon = {config.horizon}",
        f"replicates = {config.replicates}",
        f"checkpoints = [{', '.join(str(c) for c in config.checkpoints)}]",
    ]
    if config.output is not None:
        lines.append(f"output = {_toml_value(config.output)}")
    lines.append(f"oracle_budget = {config.oracle_budget}")
    lines.append("")
    lines.append("[instance]")
    spec = config.instance
    lines.append(f'kind = "{spec.kind}"')
    if spec.kind == "explicit":
        rendered = []
        for arm in spec.arms:
            if arm[0] == "bernoulli":
                rendered.append(f"{{type = \"bernoulli\", p = {_toml_value(arm[1])}}}")
            elif arm[0] == "dirac":
                rendered.append(f"{{type = \"dirac\", v = {_toml_value(arm[1])}}}")
            else:
                pairs = ", ".join(f"[{_toml_value(v)}, {_toml_value(p)}]" for v, p in arm[1])
                rendered.append(f"{{type = \"discrete\", support = [{pairs}]}}")
        lines.append("arms = [")
        for r in rendered:
            lines.append(f"    {r},")
        lines.append("]")
    else:
        lines.append(f"k = {spec.k}")
        lines.append(f"delta = {_toml_value(spec.delta)}")
        lines.append(f"mu_star = {_toml_value(spec.mu_star)}")
    for pair in config.strategies:
        lines.append("")
        lines.append("[[strategies]]")
        lines.append(f'allocation = "{pair.allocation}"')
        if pair.alpha is not None:
            lines.append(f"alpha = {_toml_value(pair.alpha)}")
        lines.append(f'recommendation = "{pair.recommendation}"')
        if pair.eba_floor:
            lines.append("eba_floor = true")
    if config.bounds is not None:
        lines.append("")
        lines.append("[bounds]")
        lines.append(f"alpha = {_toml_value(config.bounds.alpha)}")
        if config.bounds.eta is not None:
            lines.append(f"eta = {_toml_value(config.bounds.eta)}")
        if config.bounds.rho_alpha is not None:
            lines.append(f"rho_alpha = {_toml_value(config.bounds.rho_alpha)}")
    return "\n".join(lines) + "\n"


def a2_scenario_arms(k: int, delta: float, mu_star: float) -> list[Bernoulli]:
    """Bernoulli arms (mu*, mu*-delta, mu*-2*delta x (K-2))."""
    if k < 2:
        raise ConfigError(f"a2-scenario needs k >= 2, got {k}")
    if not delta > 0.0:
        raise ConfigError(f"a2-scenario needs delta > 0, got {delta}")
    if mu_star > 1.0:
        raise ConfigError(f"a2-scenario needs mu_star <= 1, got {mu_star}")
    floor_mean = mu_star - (2.0 * delta if k > 2 else delta)
    if floor_mean < 0.0:
        raise ConfigError("a2-scenario means fall below 0; decrease delta or raise mu_star")
    arms = [Bernoulli(mu_star), Bernoulli(mu_star - delta)]
    arms.extend(Bernoulli(mu_star - 2.0 * delta) for _ in range(k - 2))
    return arms


def build_instance(spec: InstanceSpec) -> BanditInstance:
    if spec.kind == "a2-scenario":
        return BanditInstance(a2_scenario_arms(spec.k, spec.delta, spec.mu_star))
    arms = []
    for arm in spec.arms:
        if arm[0] == "bernoulli":
            arms.append(Bernoulli(arm[1]))
        elif arm[0] == "dirac":
            arms.append(Dirac(arm[1]))
        else:
            arms.append(Discrete(arm[1]))
    return BanditInstance(arms)


def _build_allocation(pair: StrategyPair):
    return Unif() if pair.allocation == "unif" else Ucb(pair.alpha)


def _build_recommendation(pair: StrategyPair):
    if pair.recommendation == "edp":
        return Edp()
    if pair.recommendation == "mpa":
        return Mpa()
    return Eba(FLOOR_MULTIPLE_OF_K if pair.eba_floor else CURRENT_ROUND)


def _fmt(x: float) -> str:
    return format(x, ".17g")


def run_simulate(config: ExperimentConfig, threads: int = 1) -> list[list[str]]:
    """CSV rows (strings, header excluded) for the simulate subcommand.

    Pairs sharing an allocation are estimated from one simulation pass, so
    adding a recommendation never perturbs the others.
    """
    instance = build_instance(config.instance)
    groups: dict[tuple, list[int]] = {}
    for idx, pair in enumerate(config.strategies):
        groups.setdefault((pair.allocation, pair.alpha), []).append(idx)
    results: dict[int, object] = {}
    for indices in groups.values():
        allocation = _build_allocation(config.strategies[indices[0]])
        recs = [_build_recommendation(config.strategies[i]) for i in indices]
        curves = estimate_curves(
            instance,
            allocation,
            recs,
            config.checkpoints,
            config.replicates,
            config.seed,
            threads=threads,
        )
        for i, curve in zip(indices, curves):
            results[i] = curve
    rows = []
    for idx, pair in enumerate(config.strategies):
        curve = results[idx]
        alloc_label = _build_allocation(pair).label()
        rec_label = _build_recommendation(pair).label()
        for ci, n in enumerate(curve.checkpoints):
            rows.append(
                [
                    config.scenario_id,
                    alloc_label,
                    rec_label,
                    str(n),
                    str(config.replicates),
                    _fmt(curve.means[ci]),
                    _fmt(curve.std_errors[ci]),
                    _fmt(curve.cumulative_means[ci]),
                ]
            )
    return rows


def run_bounds(config: ExperimentConfig) -> list[list[str]]:
    """CSV rows for every applicable bound at every checkpoint."""
    if config.bounds is None:
        raise ConfigError("bounds subcommand requires a [bounds] table with 'alpha'")
    params = config.bounds
    instance = build_instance(config.instance)
    k = instance.k
    rows = []

    def emit(name: str, n: int, bv) -> None:
        rows.append(
            [
                config.scenario_id,
                name,
                str(n),
                _fmt(bv.value),
                "true" if bv.valid else "false",
            ]
        )

    for n in config.checkpoints:
        emit("unif_eba_sum", n, bounds_mod.unif_eba_bound_sum(instance, n))
        if params.eta is not None:
            emit(
                "unif_eba_mcdiarmid",
                n,
                bounds_mod.unif_eba_bound_mcdiarmid(instance, n, params.eta),
            )
        emit("unif_eba_df", n, bounds_mod.unif_eba_df_bound(k, n))
        emit("ucb_mpa_dd", n, bounds_mod.ucb_mpa_dd_bound(instance, n, params.alpha))
        if n > k:
            emit("ucb_mpa_df", n, bounds_mod.ucb_mpa_df_bound(k, n, params.alpha))
        emit("ucb_mpa_beta", n, bounds_mod.ucb_mpa_beta_bound(instance, n, params.alpha))
        emit("edp_df", n, bounds_mod.edp_df_bound(k, n, params.alpha))
        if params.rho_alpha is not None:
            emit(
                "ucb_eba",
                n,
                bounds_mod.ucb_eba_bound(instance, n, params.alpha, params.rho_alpha),
            )
        if n >= k:
            value = bounds_mod.lower_bound_df(k, n)
            rows.append([config.scenario_id, "lower_df", str(n), _fmt(value), "true"])
    return rows


def run_oracle(config: ExperimentConfig) -> list[list[str]]:
    """CSV rows with exact expected simple regrets, one per (pair, checkpoint)."""
    instance = build_instance(config.instance)
    rows = []
    for pair in config.strategies:
        allocation = _build_allocation(pair)
        recommendation = _build_recommendation(pair)
        for n in config.checkpoints:
            value = exact_expected_simple_regret(
                instance, allocation, recommendation, n, budget=config.oracle_budget
            )
            rows.append(
                [
                    config.scenario_id,
                    allocation.label(),
                    recommendation.label(),
                    str(n),
                    _fmt(value),
                    "exact",
                ]
            )
    return rows


def _parse_env(text: str):
    if text == "custom":
        raise ConfigError(
            "custom environments are only available through the library API "
            "(pure_explore.continuous.Environment); the CLI ships the tent family"
        )
    if not text.startswith("tent:"):
        raise ConfigError(f"unknown environment {text!r}; expected tent:a=<x>,rho2=<x>")
    fields = {}
    for part in text[len("tent:") :].split(","):
        if "=" not in part:
            raise ConfigError(f"malformed environment parameter {part!r}")
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    if set(fields) != {"a", "rho2"}:
        raise ConfigError(f"tent environment needs exactly a=<x>,rho2=<x>, got {sorted(fields)}")
    try:
        return float(fields["a"]), float(fields["rho2"])
    except ValueError as exc:
        raise ConfigError(f"tent parameters must be numbers: {exc}") from exc


def run_xarmed(args, threads: int = 1) -> list[list[str]]:
    """CSV rows for the continuum-armed explorer configured by CLI flags."""
    a, rho2 = _parse_env(args.env)
    noise = args.noise
    if noise not in (DETERMINISTIC, BERNOULLI):
        raise ConfigError(f"unknown noise model {noise!r}")
    env = tent_environment(a, rho2, noise)
    if args.checkpoints:
        cps = tuple(int(c) for c in args.checkpoints.split(","))
    else:
        cps = default_checkpoints(args.horizon)
    if max(cps) > args.horizon:
        raise ConfigError(f"checkpoints must lie in 1..{args.horizon}")
    curve = estimate_xarmed_curve(
        env, cps, args.replicates, args.seed, threads=threads
    )
    scenario = args.scenario_id or env.label
    rows = []
    for ci, n in enumerate(curve.checkpoints):
        rows.append(
            [
                scenario,
                env.label,
                noise,
                str(n),
                str(args.replicates),
                _fmt(curve.means[ci]),
                _fmt(curve.std_errors[ci]),
                _fmt(curve.cumulative_means[ci]),
            ]
        )
    return rows


def _write_csv(header: list[str], rows: list[list[str]], path: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    data = buf.getvalue()
    if path is None:
        sys.stdout.write(data)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(data)


def _load_config(args) -> ExperimentConfig:
    with open(args.config) as fh:
        config = parse_config(fh.read())
    if args.seed is not None:
        config = ExperimentConfig(
            **{**config.__dict__, "seed": args.seed}
        )
    if args.output is not None:
        config = ExperimentConfig(**{**config.__dict__, "output": args.output})
    return config


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("PURE_EXPLORE_THREADS")
    return int(env) if env else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pure-explore",
        description="Pure-exploration bandit experiments with reproducible CSV output.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", help="CSV output path (default: stdout)")
        p.add_argument("--threads", type=int, help="worker threads (speed only, never results)")

    for name, help_text in [
        ("simulate", "Monte-Carlo regret estimation"),
        ("bounds", "closed-form bound evaluation"),
        ("oracle", "exact expected simple regret by enumeration"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML experiment description")
        p.add_argument("--seed", type=int, help="override the config seed")
        common(p)

    p = sub.add_parser("xarmed", help="continuum-armed regime explorer")
    p.add_argument("--env", required=True, help="tent:a=<x>,rho2=<x>")
    p.add_argument("--noise", default=DETERMINISTIC, choices=[DETERMINISTIC, BERNOULLI])
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--checkpoints", help="comma-separated rounds (default: geometric grid)")
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--scenario-id", dest="scenario_id", help="CSV scenario label")
    common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = _threads(args)
    try:
        if args.command == "simulate":
            config = _load_config(args)
            _write_csv(SIMULATE_HEADER, run_simulate(config, threads), config.output)
        elif args.command == "bounds":
            config = _load_config(args)
            _write_csv(BOUNDS_HEADER, run_bounds(config), config.output)
        elif args.command == "oracle":
            config = _load_config(args)
            _write_csv(ORACLE_HEADER, run_oracle(config), config.output)
        else:
            _write_csv(XARMED_HEADER, run_xarmed(args, threads), args.output)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
