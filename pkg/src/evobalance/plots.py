"""Figure rendering for the report path.

All functions draw onto standalone Figure objects (no pyplot state) and
write the file straight to disk, so they are safe in headless and
multiprocess use.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

__all__ = [
    "tbal_histogram",
    "sweep_medians",
    "fairness_scatter",
    "mixing_curves",
]


def _save(fig: Figure, path) -> Path:
    out = Path(path)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    return out


def tbal_histogram(times: "list[int]", path, bound: int | None = None,
                   title: str = "") -> Path:
    """Histogram of balancing times, with the step bound marked if given."""
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.subplots()
    if times:
        bins = min(30, max(5, int(math.sqrt(len(times)))))
        ax.hist(times, bins=bins, color="#4878cf", edgecolor="white")
    if bound is not None:
        ax.axvline(bound, color="#d1022f", linestyle="--", label=f"bound = {bound}")
        ax.legend(frameon=False)
    ax.set_xlabel("balancing time (steps)")
    ax.set_ylabel("trials")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def sweep_medians(points: "list[tuple[float, float, str]]", path,
                  xlabel: str = "initial discrepancy", logx: bool = True) -> Path:
    """Median balancing time against a swept quantity, one line per label.

    points: (x, median, label) triples; lines are grouped by label and
    sorted along x.
    """
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.subplots()
    by_label: dict[str, list[tuple[float, float]]] = {}
    for x, med, label in points:
        by_label.setdefault(label, []).append((x, med))
    for label, xs in sorted(by_label.items()):
        xs.sort()
        ax.plot([a for a, _ in xs], [b for _, b in xs], marker="o", label=label)
    if logx:
        ax.set_xscale("log", base=2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("median balancing time (steps)")
    if len(by_label) > 1:
        ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def fairness_scatter(records: "list[tuple[float, float, float, str]]", path) -> Path:
    """Per-edge estimates against their guaranteed floors.

    records: (floor, estimate, stderr, matcher tag). A point above the
    diagonal means the estimate clears its floor.
    """
    fig = Figure(figsize=(5.5, 5.5))
    ax = fig.subplots()
    tags = sorted({r[3] for r in records})
    for tag in tags:
        xs = [r[0] for r in records if r[3] == tag]
        ys = [r[1] for r in records if r[3] == tag]
        es = [3 * r[2] for r in records if r[3] == tag]
        ax.errorbar(xs, ys, yerr=es, fmt="o", markersize=3, capsize=2,
                    elinewidth=0.7, label=tag, alpha=0.8)
    top = 1.0
    if records:
        top = 1.1 * max(max(r[0] for r in records), max(r[1] for r in records))
    ax.plot([0, top], [0, top], color="gray", linewidth=0.8, linestyle=":")
    ax.set_xlabel("guaranteed inclusion floor")
    ax.set_ylabel("estimated inclusion probability")
    if tags:
        ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def mixing_curves(series: "list[tuple[str, np.ndarray]]", path,
                  target: float | None = None) -> Path:
    """Edge-density trajectories with the stationary target line."""
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.subplots()
    for label, ys in series:
        ax.plot(np.arange(len(ys)), ys, label=label)
    if target is not None:
        ax.axhline(target, color="gray", linestyle="--", linewidth=0.8,
                   label=f"stationary {target:.3f}")
    ax.set_xlabel("step")
    ax.set_ylabel("edge density")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)
