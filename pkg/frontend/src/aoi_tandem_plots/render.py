"""Pure CSV-to-image rendering.

The plotter draws exactly what the tables contain: analytic rows as
lines, simulation rows as points with error bars, unstable rows as a
dashed boundary marker.  Output is deterministic for a fixed input: the
SVG hash salt is pinned and no timestamps are embedded.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "aoi-tandem-plots"

import matplotlib.pyplot as plt  # noqa: E402

__all__ = [
    "PlotSpec",
    "RenderInfo",
    "SchemaError",
    "NothingToPlotError",
    "render",
    "FIGURE_IDS",
]

FIGURE_IDS = ("fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig4c")

SWEEP_COLUMNS = (
    "model", "N", "lambda", "alpha", "gamma", "dist_kind", "engine",
    "aaoi", "aaoi_ci_half", "sojourn_mean", "stable", "runtime_sec",
)
WAITS_COLUMNS = (
    "model", "N", "lambda", "alpha", "gamma", "node", "engine", "wait_mean",
)


class SchemaError(ValueError):
    """A CSV does not match the declared result schema."""


class NothingToPlotError(ValueError):
    """The selection contains no drawable rows."""


@dataclass(frozen=True)
class PlotSpec:
    csv_paths: tuple
    fig_id: str
    out_path: str
    image_format: str = "svg"
    x_range: tuple | None = None
    y_range: tuple | None = None

    def __post_init__(self):
        if self.fig_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.fig_id!r}")
        if self.image_format not in ("svg", "png"):
            raise ValueError("image_format must be 'svg' or 'png'")
        missing = [p for p in self.csv_paths if not Path(p).is_file()]
        if missing:
            raise FileNotFoundError(f"missing input CSVs: {missing}")
        object.__setattr__(self, "csv_paths", tuple(self.csv_paths))


@dataclass(frozen=True)
class RenderInfo:
    out_path: str
    curve_count: int
    n_rows: int


def _load(path: str):
    """(kind, rows) where kind is 'sweep' or 'waits'; schema-checked."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = tuple(reader.fieldnames or ())
        if header == SWEEP_COLUMNS:
            kind = "sweep"
        elif header == WAITS_COLUMNS:
            kind = "waits"
        else:
            expected = SWEEP_COLUMNS
            offender = next(
                (f"unexpected column {h!r}" for h in header if h not in expected),
                None,
            ) or next(
                (f"missing column {h!r}" for h in expected if h not in header),
                "wrong column order",
            )
            raise SchemaError(f"{path}: {offender}")
        return kind, list(reader)


def _float(row, key):
    try:
        return float(row[key])
    except ValueError as exc:
        raise SchemaError(f"non-numeric {key!r} value {row[key]!r}") from exc


def render(spec: PlotSpec) -> RenderInfo:
    """Draw one panel for the figure id and write it; returns curve count."""
    sweep_rows, waits_rows = [], []
    for p in spec.csv_paths:
        kind, rows = _load(p)
        (sweep_rows if kind == "sweep" else waits_rows).append((p, rows))

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if spec.fig_id == "fig3c":
            curves = _draw_waits(ax, waits_rows)
        else:
            group_by_nodes = spec.fig_id == "fig3b"
            curves = _draw_aoi(ax, sweep_rows, group_by_nodes)
        if spec.x_range:
            ax.set_xlim(*spec.x_range)
        if spec.y_range:
            ax.set_ylim(*spec.y_range)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(
            spec.out_path, format=spec.image_format, metadata={"Date": None}
        )
    finally:
        plt.close(fig)
    n_rows = sum(len(r) for _, r in sweep_rows + waits_rows)
    return RenderInfo(out_path=spec.out_path, curve_count=curves, n_rows=n_rows)


def _draw_aoi(ax, sweep_rows, group_by_nodes: bool) -> int:
    if not sweep_rows:
        raise NothingToPlotError("no sweep-format CSV among the inputs")
    groups: dict = {}
    boundaries: dict = {}
    for _, rows in sweep_rows:
        for r in rows:
            if group_by_nodes:
                key = (int(r["N"]), r["engine"])
                label = f"N={key[0]} ({key[1]})"
            else:
                key = (_float(r, "alpha"), r["engine"])
                label = f"alpha={key[0]:g} ({key[1]})"
            lam = _float(r, "lambda")
            if r["stable"] == "true" and r["aaoi"] != "":
                ci = _float(r, "aaoi_ci_half") if r["aaoi_ci_half"] else 0.0
                groups.setdefault((key, label), []).append(
                    (lam, _float(r, "aaoi"), ci)
                )
            elif r["stable"] == "false":
                prev = boundaries.get(key)
                boundaries[key] = lam if prev is None else min(prev, lam)
    if not groups:
        raise NothingToPlotError("nothing to plot: no stable rows")
    for (key, label), pts in sorted(groups.items(), key=lambda kv: kv[0][0]):
        pts.sort()
        xs, ys, cis = zip(*pts)
        if key[1] == "simulation":
            ax.errorbar(xs, ys, yerr=cis, fmt="o--", ms=3, capsize=2,
                        label=label)
        else:
            ax.plot(xs, ys, "-", label=label)
    for lam in sorted(set(boundaries.values())):
        ax.axvline(lam, color="gray", linestyle=":", linewidth=0.8)
    ax.set_xlabel("lambda")
    ax.set_ylabel("Average AoI")
    return len(groups)


def _draw_waits(ax, waits_rows) -> int:
    if not waits_rows:
        raise NothingToPlotError("no per-node waits CSV among the inputs")
    groups: dict = {}
    for _, rows in waits_rows:
        for r in rows:
            node = int(r["node"])
            groups.setdefault(node, []).append(
                (_float(r, "lambda"), _float(r, "wait_mean"))
            )
    if not groups:
        raise NothingToPlotError("nothing to plot: empty waits table")
    for node in sorted(groups):
        pts = sorted(groups[node])
        xs, ys = zip(*pts)
        ax.plot(xs, ys, "o-", ms=3, label=f"node {node}")
    ax.set_xlabel("lambda")
    ax.set_ylabel("Expected waiting time")
    return len(groups)
