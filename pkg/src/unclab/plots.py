"""Tidy plot-data emission and figure rendering from experiment results.

Results CSVs are reshaped into a long-format (x, series, value) table that
generic plotting tools can consume directly; alongside it, a matplotlib
figure per experiment is rendered to PNG.  The experiment kind is read from
the run manifest when present, otherwise inferred from column signatures.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["PlotDataError", "emit_plot_data", "tidy_series", "render_figure"]


class PlotDataError(ValueError):
    pass


# signature column -> experiment, tried in order when no manifest is found
_SIGNATURES = [
    ("layers", "accessible-dim"),
    ("rank_short", "bw-monotone"),
    ("rank_km1", "negentropy-dim"),
    ("guess_prob", "expend"),
    ("converse_cap", "extract"),
    ("h_c", "entropy"),
    ("distance", "fuzz-bound"),
]

# experiment -> (x column or None for row index, series columns)
_LAYOUT = {
    "fuzz-bound": ("trial", ("distance", "bound")),
    "entropy": ("r", ("h_hyp", "h_c", "negentropy")),
    "extract": (None, ("distance", "bound")),
    "expend": (None, ("guess_prob", "bound")),
    "accessible-dim": ("layers", ("rank",)),
    "bw-monotone": ("trial", ("rank_short", "rank_long")),
    "negentropy-dim": ("trial", ("rank_km1", "rank_k")),
}


def _read_rows(path: Path) -> tuple:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return tuple(reader.fieldnames or ()), rows


def _infer_experiment(results: Path, cols: tuple) -> str:
    manifest = results.parent / "manifest.json"
    if manifest.exists():
        return json.loads(manifest.read_text())["config"]["experiment"]
    for col, name in _SIGNATURES:
        if col in cols:
            return name
    raise PlotDataError(f"cannot infer experiment kind from columns {sorted(cols)}")


def _x_value(experiment: str, row: dict, index: int) -> float:
    x_col, _ = _LAYOUT[experiment]
    if experiment in ("extract", "expend"):
        # scatter against the theorem budget scale r*epsilon
        return float(row["r"]) * float(row["epsilon"])
    if x_col is None:
        return float(index)
    return float(row[x_col])


def tidy_series(rows: list, experiment: str) -> list:
    """Long-format (x, series, value) triples for one experiment's rows."""
    if experiment not in _LAYOUT:
        raise PlotDataError(f"unknown experiment kind {experiment!r}")
    _, series_cols = _LAYOUT[experiment]
    if rows:
        missing = [c for c in series_cols if c not in rows[0]]
        if missing:
            raise PlotDataError(f"results are missing columns {missing}")
    out = []
    for i, row in enumerate(rows):
        x = _x_value(experiment, row, i)
        for col in series_cols:
            out.append((x, col, float(row[col])))
    return out


def render_figure(triples: list, experiment: str, path: Path) -> None:
    """One PNG per experiment: scatter vs bound line for the protocol runs,
    line plots for sweeps."""
    fig, ax = plt.subplots(figsize=(6, 4))
    by_series = {}
    for x, series, value in triples:
        by_series.setdefault(series, []).append((x, value))
    for series, pts in by_series.items():
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        if series == "bound":
            ax.plot(xs, ys, "r--", label="bound")
        elif experiment in ("fuzz-bound", "extract", "expend"):
            ax.scatter(xs, ys, s=8, label=series)
        else:
            ax.plot(xs, ys, marker="o", ms=3, lw=1, label=series)
    x_col, _ = _LAYOUT[experiment]
    if experiment in ("extract", "expend"):
        ax.set_xlabel("r * epsilon")
    else:
        ax.set_xlabel(x_col if x_col else "row")
    ax.set_ylabel("value")
    ax.set_title(experiment)
    if by_series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def emit_plot_data(
    results: Path,
    out_dir: Optional[Path] = None,
    experiment: Optional[str] = None,
    figures: bool = True,
) -> Path:
    """Write plot_data.csv (and a PNG figure) next to `results`; returns the
    CSV path.  Empty results produce an empty series and no failure."""
    results = Path(results)
    if not results.exists():
        raise PlotDataError(f"results file not found: {results}")
    cols, rows = _read_rows(results)
    if experiment is None:
        experiment = _infer_experiment(results, cols)
    triples = tidy_series(rows, experiment)
    out_dir = Path(out_dir) if out_dir is not None else results.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / "plot_data.csv"
    with open(data_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "series", "value"])
        for x, series, value in triples:
            writer.writerow([format(x, ".17g"), series, format(value, ".17g")])
    if figures:
        render_figure(triples, experiment, out_dir / f"{experiment}.png")
    return data_path
