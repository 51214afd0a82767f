"""File-based figure rendering for traces, recoveries, and sweeps.

Figures are written next to the delimited output of each CLI command;
everything uses the Agg backend so runs work headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_trace(records, path) -> None:
    """Objective value and direction norm against the iteration counter."""
    ks = [r.k for r in records]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    axes[0].plot(ks, [r.F for r in records], lw=1.0)
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("objective F")
    axes[1].semilogy(ks, [r.norm_d for r in records], lw=1.0)
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("||d||")
    if records and records[0].rel_err is not None:
        axes[0].twinx().semilogy(
            ks, [r.rel_err for r in records], color="tab:red", lw=0.8
        )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_recovery(x_bar, b, x_star, path) -> None:
    """Original signal, noisy measurement, and recovered-vs-original panels."""
    fig, axes = plt.subplots(3, 1, figsize=(8, 7), sharex=False)
    axes[0].plot(x_bar, lw=0.8, color="tab:blue")
    axes[0].set_title(f"original signal (n={len(x_bar)})")
    axes[1].plot(b, lw=0.8, color="tab:gray")
    axes[1].set_title(f"measurement (m={len(b)})")
    axes[2].plot(x_bar, lw=0.8, color="tab:blue", label="original")
    nz = np.flatnonzero(x_star)
    axes[2].plot(nz, np.asarray(x_star)[nz], "o", ms=4, mfc="none",
                 color="tab:red", label="recovered")
    axes[2].set_title("recovered vs original")
    axes[2].legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(rows, path) -> None:
    """Iterations, time, and final relative error against h (log axis)."""
    hs = [r.h for r in rows]
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
    panels = [
        ([r.iterations for r in rows], "iterations", False),
        ([r.elapsed for r in rows], "time [s]", False),
        ([r.rel_err for r in rows], "relative error", True),
    ]
    for ax, (ys, label, logy) in zip(axes, panels):
        (ax.loglog if logy else ax.semilogx)(hs, ys, "o-", ms=3, lw=1.0)
        ax.set_xlabel("h")
        ax.set_ylabel(label)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
