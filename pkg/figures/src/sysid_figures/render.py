"""Figure construction from loaded sweep tables.

One figure family per experiment family: error and bound against the
experiment count per offset size (``fig1``), single-trajectory error per
input scale (``fig2``), perturbed-initialization error (``fig3``), error
against the offset-center size (``fig4``), error against the ridge
weight (``fig5``), and the decay-rate check with a fitted log-log slope
(``rate_check``).

Everything plotted is read from the CSV's aggregated rows; nothing is
recomputed.  Rendering is a pure function of the file contents, so a
given CSV always produces the same plotted data points.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .loader import AggregateRow, SweepTable, load_table

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "rate_check")

# Error-versus-N families read naturally on doubly logarithmic axes; the
# offset-size and ridge-weight sweeps use linear ones.
LOG_LOG_DEFAULTS = {
    "fig1": True,
    "fig2": True,
    "fig3": True,
    "fig4": False,
    "fig5": False,
    "rate_check": True,
}


@dataclass(frozen=True)
class FigureJob:
    """One rendering request: which CSV, which figure family, where to."""

    csv_path: str | Path
    figure_id: str
    output_path: str | Path
    log_log: bool | None = None

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(
                f"unknown figure id {self.figure_id!r}; expected one of {FIGURE_IDS}"
            )

    @property
    def effective_log_log(self) -> bool:
        if self.log_log is None:
            return LOG_LOG_DEFAULTS[self.figure_id]
        return self.log_log


def _plottable(table: SweepTable) -> list[AggregateRow]:
    rows = [row for row in table.aggregates if row.error_mean is not None]
    if not rows:
        raise ValueError(
            "no aggregated rows carry an error mean (every sweep point failed); "
            "nothing to plot"
        )
    return rows


def _group_values(rows, attr: str, figure_id: str) -> list[float]:
    values = []
    for row in rows:
        value = getattr(row, attr)
        if value is None:
            raise ValueError(
                f"figure {figure_id!r} groups rows by {attr!r} but the csv "
                f"leaves it empty; is this the right figure for this file?"
            )
        values.append(value)
    return sorted(set(values))


def _color(index: int) -> str:
    cycle = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    return cycle[index % len(cycle)]


def _curve(rows, x_attr: str):
    pts = sorted((getattr(row, x_attr), row.error_mean) for row in rows)
    return [p[0] for p in pts], [p[1] for p in pts]


def _error_versus_n(ax, rows, group_attr: str, label_fmt: str, figure_id: str):
    for i, key in enumerate(_group_values(rows, group_attr, figure_id)):
        group = [row for row in rows if getattr(row, group_attr) == key]
        xs, ys = _curve(group, "n")
        ax.plot(xs, ys, marker="o", markersize=3, color=_color(i), label=label_fmt.format(key))
    ax.set_xlabel("number of experiments N")
    ax.set_ylabel("mean estimation error")


def _fig1(ax, rows):
    """Error and bound per offset size; legend pairs ascend in q."""
    for i, q in enumerate(_group_values(rows, "q", "fig1")):
        group = [row for row in rows if row.q == q]
        xs, ys = _curve(group, "n")
        ax.plot(xs, ys, marker="o", markersize=3, color=_color(i), label=f"error, q={q:g}")
        bounded = [row for row in group if row.bound_total is not None]
        if not bounded:
            raise ValueError(
                f"figure 'fig1' overlays 'bound_total' but no row carries it for q={q:g}"
            )
        bx = sorted((row.n, row.bound_total) for row in bounded)
        ax.plot(
            [p[0] for p in bx],
            [p[1] for p in bx],
            linestyle="--",
            color=_color(i),
            label=f"bound, q={q:g}",
        )
    ax.set_xlabel("number of experiments N")
    ax.set_ylabel("mean estimation error / bound")


def _fig4(ax, rows):
    for i, q in enumerate(_group_values(rows, "q", "fig4")):
        group = [row for row in rows if row.q == q]
        xs, ys = _curve(group, "m_norm1")
        ax.plot(xs, ys, marker="o", markersize=4, color=_color(i), label=f"q={q:g}")
    ax.set_xlabel("offset center size ‖m‖₁")
    ax.set_ylabel("mean estimation error")


def _fig5(ax, rows):
    for i, q in enumerate(_group_values(rows, "q", "fig5")):
        group = [row for row in rows if row.q == q]
        xs, ys = _curve(group, "lam")
        ax.plot(xs, ys, color=_color(i), label=f"q={q:g}")
    ax.set_xlabel("ridge weight λ")
    ax.set_ylabel("mean estimation error")


def _rate_check(ax, rows):
    xs, ys = _curve(rows, "n")
    if len(xs) < 2:
        raise ValueError("the rate check needs at least two sweep points to fit a slope")
    ax.plot(xs, ys, marker="o", markersize=3, color=_color(0), label="mean error")
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    fit = np.exp(intercept) * np.asarray(xs, dtype=float) ** slope
    ax.plot(xs, fit, linestyle="--", color=_color(1), label=f"fitted slope = {slope:.3f}")
    ax.set_xlabel("number of experiments N")
    ax.set_ylabel("mean estimation error")


def build_figure(job: FigureJob):
    """Load the job's CSV and return the assembled matplotlib figure.

    Split from :func:`render` so tests can inspect the plotted data
    without touching the filesystem.
    """
    table = load_table(job.csv_path)
    rows = _plottable(table)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if job.figure_id == "fig1":
        _fig1(ax, rows)
    elif job.figure_id == "fig2":
        _error_versus_n(ax, rows, "sigma_u", "sigma_u={:g}", "fig2")
    elif job.figure_id == "fig3":
        _error_versus_n(ax, rows, "q", "q={:g}", "fig3")
    elif job.figure_id == "fig4":
        _fig4(ax, rows)
    elif job.figure_id == "fig5":
        _fig5(ax, rows)
    else:
        _rate_check(ax, rows)
    if job.effective_log_log:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    ax.set_title(f"{table.experiment} ({table.system})")
    fig.tight_layout()
    return fig


def render(job: FigureJob) -> Path:
    """Render the job to its output image file and return the path."""
    fig = build_figure(job)
    out = Path(job.output_path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.savefig(out, dpi=150)
    finally:
        plt.close(fig)
    return out
