#!/usr/bin/env python3
"""
Static SVG figures for experiment reports

Every series drawn here comes from a table that is also written as CSV.
"""

import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Get logger
logger = logging.getLogger("ncentropy")


def line_panels(path, panels, title=None, columns=None):
    """
    Args:
        panels: list of dicts with keys title, xlabel, ylabel and series, where
            series maps a legend label to (x, y) sequences; an optional "band"
            maps a label to (x, lo, hi) for shaded ranges
    """
    count = len(panels)
    columns = columns or min(count, 3)
    rows = (count + columns - 1) // columns
    fig, axes = plt.subplots(rows, columns, figsize=(4.5 * columns, 3.5 * rows), squeeze=False)
    for ax, panel in zip(axes.flat, panels):
        for label, (x, y) in panel.get("series", {}).items():
            ax.plot(x, y, marker="o", markersize=3, label=label)
        for label, (x, lo, hi) in panel.get("band", {}).items():
            ax.fill_between(x, lo, hi, alpha=0.3, label=label)
        ax.set_title(panel.get("title", ""))
        ax.set_xlabel(panel.get("xlabel", ""))
        ax.set_ylabel(panel.get("ylabel", ""))
        if panel.get("logx"):
            ax.set_xscale("log")
        if panel.get("series") or panel.get("band"):
            ax.legend(fontsize=7)
    for ax in list(axes.flat)[count:]:
        ax.set_visible(False)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.debug(f"Wrote figure {path}")


def category_lines(path, categories, series, title=None, ylabel="entropy (nats)"):
    """One line per series over categorical x positions"""
    fig, ax = plt.subplots(figsize=(6, 4))
    positions = list(range(len(categories)))
    for label, values in series.items():
        ax.plot(positions, values, marker="o", label=label)
    ax.set_xticks(positions)
    ax.set_xticklabels(categories)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.debug(f"Wrote figure {path}")
