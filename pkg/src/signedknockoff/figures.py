"""Figure rendering for CLI reports.

Every function writes PNG files next to the delimited outputs and returns
the paths. The CSV/JSON outputs remain the canonical record; figures are a
convenience layer and can be switched off with --no-figures.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_signedp_histogram",
    "save_fdr_trace",
    "save_sweep_curves",
    "save_study_summary",
    "save_study_curves",
]

_DPI = 150


def save_signedp_histogram(q: np.ndarray, region, path, bins: int = 60) -> Path:
    """Histogram of signed p-values; ``region`` (if given) draws the final
    rejection boundaries."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(q, bins=np.linspace(-1, 1, bins + 1), color="0.75", edgecolor="0.4")
    if region is not None:
        ax.axvline(region["neg_boundary"], color="tab:red", ls="--", label="boundaries")
        ax.axvline(region["pos_boundary"], color="tab:red", ls="--")
        ax.axvspan(-1, region["neg_boundary"], color="tab:red", alpha=0.08)
        ax.axvspan(region["pos_boundary"], 1, color="tab:red", alpha=0.08)
        ax.legend(loc="upper center")
    ax.set_xlim(-1, 1)
    ax.set_xlabel("signed p-value")
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_fdr_trace(trace: list, alpha: float, path) -> Path:
    """Estimated FDR along the acceptance steps, with the target level."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(len(trace)), trace, lw=1.2)
    ax.axhline(alpha, color="tab:red", ls="--", label=f"target {alpha:g}")
    ax.set_xlabel("step")
    ax.set_ylabel("estimated FDR")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_sweep_curves(sweep_rows: list, path) -> Path:
    """Rejection counts (total / negative / positive) against alpha."""
    path = Path(path)
    alphas = [row["alpha"] for row in sweep_rows]
    fig, axes = plt.subplots(3, 1, figsize=(6, 8), sharex=True)
    for ax, key, label in zip(axes, ("total", "neg", "pos"), ("total", "negative", "positive")):
        ax.plot(alphas, [row[key] for row in sweep_rows], marker="o", ms=3)
        ax.set_ylabel(f"{label} rejections")
    axes[-1].set_xlabel("nominal FDR level")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_study_summary(rows: list, alpha: float, path) -> Path:
    """Mean FDP and power per procedure with Monte Carlo error bars."""
    path = Path(path)
    names = [row["procedure"] for row in rows]
    x = np.arange(len(names))
    fig, (ax_fdp, ax_pow) = plt.subplots(1, 2, figsize=(9, 4))
    ax_fdp.bar(x, [row["mean_fdp"] for row in rows], yerr=[2 * row["mcse_fdp"] for row in rows],
               color="0.75", edgecolor="0.3", capsize=4)
    ax_fdp.axhline(alpha, color="tab:red", ls="--", label=f"target {alpha:g}")
    ax_fdp.set_xticks(x, names)
    ax_fdp.set_ylabel("mean FDP")
    ax_fdp.legend()
    powers = np.nan_to_num([row["mean_power"] for row in rows])  # all-null studies
    ax_pow.bar(x, powers, yerr=[2 * row["mcse_power"] for row in rows],
               color="0.75", edgecolor="0.3", capsize=4)
    ax_pow.set_xticks(x, names)
    ax_pow.set_ylabel("mean power")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_study_curves(grid_rows: list, vary: str, alpha: float, path) -> Path:
    """FDP and power curves against a varied design field, per procedure."""
    path = Path(path)
    names = sorted({row["procedure"] for row in grid_rows})
    fig, (ax_fdp, ax_pow) = plt.subplots(1, 2, figsize=(9, 4))
    for name in names:
        rows = [row for row in grid_rows if row["procedure"] == name]
        rows.sort(key=lambda row: row[vary])
        xs = [row[vary] for row in rows]
        ax_fdp.plot(xs, [row["mean_fdp"] for row in rows], marker="o", ms=3, label=name)
        ax_pow.plot(xs, [row["mean_power"] for row in rows], marker="o", ms=3, label=name)
    ax_fdp.axhline(alpha, color="tab:red", ls="--")
    ax_fdp.set_xlabel(vary)
    ax_fdp.set_ylabel("mean FDP")
    ax_pow.set_xlabel(vary)
    ax_pow.set_ylabel("mean power")
    ax_pow.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
