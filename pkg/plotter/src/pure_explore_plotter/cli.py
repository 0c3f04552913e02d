"""Plot simple-regret curves from pure-explore CSV output.

One solid curve per (allocation, recommendation) pair with a +/- 2 standard
error band; optional bound overlays drawn dashed where the bound's validity
flag is true and dotted where it is false. Bound values above the clamp
ceiling are truncated for display only; input files are never modified.
Rendering is deterministic: identical inputs give identical image bytes.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["PlotSpec", "PlotterError", "render", "main"]

SIMULATE_COLUMNS = {
    "scenario_id",
    "allocation",
    "recommendation",
    "n",
    "replicates",
    "mean_simple_regret",
    "std_error",
}
BOUNDS_COLUMNS = {"scenario_id", "bound", "n", "value", "valid"}

PNG_METADATA = {"Software": "pure-explore-plotter"}


class PlotterError(ValueError):
    """Unusable input: missing file, malformed CSV, or nothing to plot."""


@dataclass(frozen=True)
class PlotSpec:
    simulate_csv: str
    output: str
    bounds_csv: str | None = None
    logx: bool = False
    logy: bool = False
    clamp: float | None = None


def _read_rows(path: str, required: set[str], label: str) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise PlotterError(f"{label} file {path} is empty")
            missing = required - set(reader.fieldnames)
            if missing:
                raise PlotterError(f"{label} file {path} lacks columns {sorted(missing)}")
            rows = list(reader)
    except OSError as exc:
        raise PlotterError(f"cannot read {label} file {path}: {exc}") from exc
    if not rows:
        raise PlotterError(f"{label} file {path} has no data rows")
    return rows


def _float(row: dict, key: str, path: str) -> float:
    try:
        return float(row[key])
    except (TypeError, ValueError) as exc:
        raise PlotterError(f"{path}: bad value {row.get(key)!r} in column {key}") from exc


def _int(row: dict, key: str, path: str) -> int:
    try:
        return int(row[key])
    except (TypeError, ValueError) as exc:
        raise PlotterError(f"{path}: bad value {row.get(key)!r} in column {key}") from exc


def _load_curves(path: str) -> dict[str, list[tuple[int, float, float]]]:
    curves: dict[str, list[tuple[int, float, float]]] = {}
    for row in _read_rows(path, SIMULATE_COLUMNS, "simulate"):
        label = f"{row['allocation']}+{row['recommendation']}"
        point = (
            _int(row, "n", path),
            _float(row, "mean_simple_regret", path),
            _float(row, "std_error", path),
        )
        curves.setdefault(label, []).append(point)
    for points in curves.values():
        points.sort(key=lambda p: p[0])
    return curves


def _load_bounds(path: str) -> dict[str, list[tuple[int, float, bool]]]:
    bounds: dict[str, list[tuple[int, float, bool]]] = {}
    for row in _read_rows(path, BOUNDS_COLUMNS, "bounds"):
        flag = row["valid"].strip().lower()
        if flag not in ("true", "false"):
            raise PlotterError(f"{path}: valid column must be true/false, got {row['valid']!r}")
        point = (_int(row, "n", path), _float(row, "value", path), flag == "true")
        bounds.setdefault(row["bound"], []).append(point)
    for points in bounds.values():
        points.sort(key=lambda p: p[0])
    return bounds


def _validity_segments(points):
    """Split a bound curve into runs of constant validity.

    Each segment starts at the previous run's last point so the overlay has
    no visual gaps.
    """
    segments = []
    current = [points[0]]
    for point in points[1:]:
        if point[2] == current[-1][2]:
            current.append(point)
        else:
            segments.append(current)
            current = [current[-1][:2] + (point[2],), point]
    segments.append(current)
    return segments


def render(spec: PlotSpec) -> None:
    """Write the figure described by ``spec``; raises PlotterError on bad input."""
    curves = _load_curves(spec.simulate_csv)
    bounds = _load_bounds(spec.bounds_csv) if spec.bounds_csv else {}

    fig, ax = plt.subplots(figsize=(8.0, 5.0), dpi=100)
    for label in sorted(curves):
        points = curves[label]
        ns = [p[0] for p in points]
        means = [p[1] for p in points]
        halfwidth = [2.0 * p[2] for p in points]
        (line,) = ax.plot(ns, means, "-", linewidth=1.6, label=label)
        ax.fill_between(
            ns,
            [m - h for m, h in zip(means, halfwidth)],
            [m + h for m, h in zip(means, halfwidth)],
            alpha=0.2,
            color=line.get_color(),
            linewidth=0,
        )
    for name in sorted(bounds):
        points = bounds[name]
        if spec.clamp is not None:
            points = [(n, min(v, spec.clamp), ok) for n, v, ok in points]
        color = None
        labeled = False
        for segment in _validity_segments(points):
            style = "--" if segment[-1][2] else ":"
            (line,) = ax.plot(
                [p[0] for p in segment],
                [p[1] for p in segment],
                style,
                linewidth=1.2,
                color=color,
                label=name if not labeled else None,
            )
            color = line.get_color()
            labeled = True
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel("rounds n")
    ax.set_ylabel("mean simple regret")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.output, format="png", metadata=PNG_METADATA)
    plt.close(fig)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotter",
        description="Render pure-explore simulate/bounds CSVs as a regret plot.",
    )
    parser.add_argument("--simulate", required=True, help="simulate CSV path")
    parser.add_argument("--bounds", help="optional bounds CSV path")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--logx", action="store_true")
    parser.add_argument("--logy", action="store_true")
    parser.add_argument("--clamp", type=float, help="display ceiling for bound values")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        simulate_csv=args.simulate,
        output=args.out,
        bounds_csv=args.bounds,
        logx=args.logx,
        logy=args.logy,
        clamp=args.clamp,
    )
    try:
        render(spec)
    except PlotterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
