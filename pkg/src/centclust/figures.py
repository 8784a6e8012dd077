"""Report figures rendered to files with the Agg backend.

Renders are deterministic: the same inputs produce the same PNG bytes, so
figures can participate in byte-exact replay checks alongside the delimited
outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE = dict(dpi=110, metadata={"Software": "centclust"})


def plot_cluster_counts(distribution, path) -> None:
    """Bar chart of the posterior cluster-count distribution."""
    ks = sorted(int(k) for k in distribution)
    probs = [distribution[k] if k in distribution else distribution[str(k)] for k in ks]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(ks, probs, color="#4878a8", width=0.7)
    ax.set_xticks(ks)
    ax.set_xlabel("number of clusters")
    ax.set_ylabel("posterior probability")
    ax.set_ylim(0, 1.0)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_mode_curves(report, path) -> None:
    """Ball probability of each detected mode across the radius grid."""
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    if len(report.mode_indices) == 0:
        ax.text(0.5, 0.5, "no modes detected", ha="center", va="center",
                transform=ax.transAxes)
    for j, idx in enumerate(report.mode_indices):
        ax.plot(report.grid, report.curves[j], label=f"mode at entry {idx}")
        ax.plot([report.epsilons[j]], [report.neighborhood_probs[j]],
                marker="o", color="black", markersize=4)
    ax.set_xlabel("ball radius")
    ax.set_ylabel("ball probability")
    ax.set_ylim(0, 1.05)
    if report.mode_indices:
        ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_trace_diagnostics(trace, path) -> None:
    """Cluster count and concentration series over kept iterations."""
    iters = [e.iteration for e in trace]
    ks = [e.k for e in trace]
    alphas = np.array([e.alpha for e in trace], dtype=float)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 4.2), sharex=True)
    ax1.step(iters, ks, where="mid", color="#4878a8")
    ax1.set_ylabel("clusters")
    if np.isfinite(alphas).any():
        ax2.plot(iters, alphas, color="#a85448", linewidth=0.9)
    else:
        ax2.text(0.5, 0.5, "no concentration series", ha="center", va="center",
                 transform=ax2.transAxes)
    ax2.set_ylabel("alpha")
    ax2.set_xlabel("iteration")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_data_preview(dataset, path, thin_rows: int = 1) -> None:
    """Quick look at a dataset: histogram in one dimension, scatter of the
    first two columns otherwise.  thin_rows keeps every thin_rows-th row."""
    if thin_rows < 1:
        raise ValueError("thin_rows must be >= 1")
    rows = dataset.rows[::thin_rows]
    names = dataset.column_names
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if dataset.d == 1:
        ax.hist(rows[:, 0], bins=min(40, max(10, len(rows) // 10)),
                color="#4878a8", edgecolor="white")
        ax.set_xlabel(names[0] if names else "value")
        ax.set_ylabel("count")
    else:
        ax.scatter(rows[:, 0], rows[:, 1], s=8, color="#4878a8", alpha=0.7)
        ax.set_xlabel(names[0] if names else "column 0")
        ax.set_ylabel(names[1] if names else "column 1")
    ax.set_title(f"{len(rows)} of {dataset.n} rows")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
