"""Static result figures rendered alongside the delimited output."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .model import WindowReport  # noqa: E402


def render_window_metrics(reports: Sequence[WindowReport], path) -> None:
    """Per-window quality and structure curves, saved as one PNG."""
    scored = [r for r in reports if not r.skipped]
    fig, (ax_q, ax_s) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)

    idx = [r.window_index for r in scored]
    pur = [r.purity for r in scored]
    f1 = [r.f_measure for r in scored]
    if any(v is not None for v in pur):
        ax_q.plot(idx, pur, marker="o", label="purity")
    if any(v is not None for v in f1):
        ax_q.plot(idx, f1, marker="s", label="F-measure")
    ax_q.set_ylabel("score")
    ax_q.set_ylim(0.0, 1.05)
    ax_q.grid(True, alpha=0.3)
    if ax_q.lines:
        ax_q.legend(loc="lower left")
    else:
        ax_q.text(0.5, 0.5, "no ground-truth labels", ha="center",
                  va="center", transform=ax_q.transAxes)

    ax_s.step(idx, [r.n_clusters for r in scored], where="mid",
              label="clusters", color="tab:green")
    ax_s.step(idx, [r.n_outliers for r in scored], where="mid",
              label="outliers", color="tab:red")
    ax_s.set_xlabel("window")
    ax_s.set_ylabel("count")
    ax_s.grid(True, alpha=0.3)
    ax_s.legend(loc="upper left")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_outlier_comparison(srv_rate: float, nn_rate: float, path) -> None:
    """Bar chart of the two detectors' average error rates."""
    fig, ax = plt.subplots(figsize=(4.5, 4))
    bars = ax.bar(["SRV detector", "1-NN baseline"],
                  [100 * srv_rate, 100 * nn_rate],
                  color=["tab:blue", "tab:orange"])
    ax.bar_label(bars, fmt="%.2f%%")
    ax.set_ylabel("average outlier error rate (%)")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
