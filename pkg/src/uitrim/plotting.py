"""PNG figures for CLI reports; byte-stable for identical inputs."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .representations import COMPONENTS  # noqa: E402

_LABEL_COLORS = {"positive": "tab:green", "neutral": "tab:gray", "negative": "tab:red"}


def _save(fig, path) -> None:
    fig.tight_layout()
    # no Software/date metadata so reruns produce identical bytes
    fig.savefig(path, format="png", dpi=100, metadata={"Software": None})
    plt.close(fig)


def plot_trajectory(ledger, path) -> None:
    from .synthesis import best_so_far

    fig, ax = plt.subplots(figsize=(9, 4))
    for label, color in _LABEL_COLORS.items():
        pts = [(r.iteration, r.mean_efficiency) for r in ledger.records
               if r.label == label and r.program is not None]
        if pts:
            xs, ys = zip(*pts)
            ax.scatter(xs, ys, s=6, color=color, alpha=0.5, label=f"{label} candidates")
    iters = list(range(len(ledger.trajectory)))
    ax.step(iters, [best_so_far(ledger, i) for i in iters], where="post", color="black",
            label="best violation-free efficiency")
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean efficiency")
    ax.set_ylim(-0.02, 1.0)
    ax.legend(loc="upper left", bbox_to_anchor=(1.01, 1.0), fontsize=8)
    _save(fig, path)


def plot_qos(reports: Sequence, path) -> None:
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 4))
    for name, style in (("baseline", "o-"), ("transform", "s-")):
        rows = sorted((r for r in reports if r.configuration == name),
                      key=lambda r: r.concurrency)
        xs = [r.concurrency for r in rows]
        left.plot(xs, [r.mean_latency_ms for r in rows], style, label=name)
        right.plot(xs, [r.throughput_qpm for r in rows], style, label=name)
    left.set_xlabel("concurrency")
    left.set_ylabel("mean latency (ms)")
    right.set_xlabel("concurrency")
    right.set_ylabel("throughput (QPM)")
    left.legend(fontsize=8)
    _save(fig, path)


def plot_profile(rows: Sequence, path) -> None:
    fig, ax = plt.subplots(figsize=(8, 0.6 * len(rows) + 1.5))
    labels = [f"{r.model} / {r.benchmark} / {r.agent}" for r in rows]
    lefts = [0.0] * len(rows)
    for name in COMPONENTS:
        shares = [r.means[name] / r.total if r.total else 0.0 for r in rows]
        ax.barh(labels, shares, left=lefts, label=name)
        lefts = [a + b for a, b in zip(lefts, shares)]
    ax.set_xlabel("share of prompt tokens")
    ax.set_xlim(0, 1)
    ax.invert_yaxis()
    ax.legend(ncol=3, fontsize=7, loc="lower left")
    _save(fig, path)


def plot_overhead(samples: Sequence[float], path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(samples, bins=40, color="tab:blue")
    ax.set_xlabel("transform latency per tree (ms)")
    ax.set_ylabel("trees")
    _save(fig, path)
