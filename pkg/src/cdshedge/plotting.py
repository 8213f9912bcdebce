"""Figure rendering for the report commands.

Figures are drawn with the object-oriented matplotlib API onto an Agg canvas,
so rendering works headless and never touches global pyplot state.  Every
report figure regenerates from the delimited output files alone; rendering
here is a convenience for quick inspection.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np


def _new_figure(width: float = 7.0, height: float = 4.5):
    from matplotlib.backends.backend_agg import FigureCanvasAgg
    from matplotlib.figure import Figure

    fig = Figure(figsize=(width, height), dpi=150)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path: str) -> None:
    fig.savefig(path, bbox_inches="tight")


def plot_bounds(rows: Sequence, path: str) -> None:
    """Ask/bid bounds and the interpolated quote versus maturity index."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    m = [row.maturity_index for row in rows]
    ax.plot(m, [100 * row.opt_ask for row in rows], "o", label="ask bound (optimized)",
            color="tab:red", markersize=5)
    ax.plot(m, [100 * row.opt_bid for row in rows], "s", label="bid bound (optimized)",
            color="tab:blue", markersize=5)
    van_ask = [(row.maturity_index, 100 * row.van_ask) for row in rows if row.van_ask is not None]
    if van_ask:
        ax.plot(*zip(*van_ask), "^", label="ask bound (single-instrument)",
                color="tab:orange", markersize=4, alpha=0.8)
    ax.plot(m, [100 * row.van_bid for row in rows], "v", label="bid bound (single-instrument)",
            color="tab:cyan", markersize=4, alpha=0.8)
    interp = [(row.maturity_index, 100 * row.interpolated) for row in rows
              if row.interpolated is not None]
    if interp:
        ax.plot(*zip(*interp), "d-", label="interpolated quote", color="tab:gray",
                markersize=4, linewidth=1)
    ax.set_xlabel("time to maturity (quarters)")
    ax.set_ylabel("upfront price (% of notional)")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_cdf(ratios_by_variant: Mapping[str, np.ndarray], path: str) -> None:
    """Empirical CDF of the hedged/unhedged maximum-loss ratio per variant."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    for variant, ratios in ratios_by_variant.items():
        x = np.sort(np.asarray(ratios))
        y = np.arange(1, len(x) + 1) / len(x)
        ax.step(x, y, where="post", label=f"market {variant}")
    ax.set_xlabel("maximum-loss ratio (hedged / cash-only)")
    ax.set_ylabel("cumulative probability")
    ax.set_xlim(0, 1.05)
    ax.set_ylim(0, 1.02)
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_density(estimate, path: str, title: str = "") -> None:
    """Histogram of the continuous part plus markers for the atoms."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    edges = estimate.bin_edges
    mids = 100 * 0.5 * (edges[:-1] + edges[1:])
    width = 100 * (edges[1] - edges[0])
    ax.bar(mids, estimate.bin_masses, width=width, color="tab:blue",
           label="continuous part (mass per bin)")
    for value, mass in estimate.atoms:
        ax.plot([100 * value], [mass], "r*", markersize=12)
        ax.vlines(100 * value, 0, mass, color="tab:red", linewidth=1.5)
    ax.plot([], [], "r*", label="atom")
    ax.set_xlabel("realized present value (% of notional)")
    ax.set_ylabel("probability mass")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_spectrum(spectrum, path: str) -> None:
    """Discrete value spectrum under a constant recovery rate."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    values = 100 * spectrum.values
    ax.vlines(values, 0, spectrum.probabilities, color="tab:blue", linewidth=1.5)
    ax.plot(values, spectrum.probabilities, "o", color="tab:blue", markersize=4,
            label="default in quarter k")
    ax.vlines(100 * spectrum.survival_value, 0, spectrum.survival_mass,
              color="tab:red", linewidth=1.5)
    ax.plot([100 * spectrum.survival_value], [spectrum.survival_mass], "r*",
            markersize=12, label="survival atom")
    ax.set_xlabel("realized present value (% of notional)")
    ax.set_ylabel("probability")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)
