"""Report figures rendered next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from ..downeval import MetricReport, RocReport


def confusion_figure(report: MetricReport, path) -> None:
    counts = report.confusion.counts
    classes = [str(c) for c in report.confusion.classes]
    fig, ax = plt.subplots(figsize=(1.0 + 0.6 * len(classes), 0.8 + 0.6 * len(classes)))
    im = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(len(classes)), classes, rotation=45, ha="right")
    ax.set_yticks(range(len(classes)), classes)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = counts.max() / 2 if counts.size else 0
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            ax.text(j, i, str(int(counts[i, j])), ha="center", va="center",
                    color="white" if counts[i, j] > threshold else "black", fontsize=8)
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def roc_figure(report: RocReport, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4.2))
    for c in report.classes:
        curve = report.per_class[c]
        if curve is None:
            continue
        ax.plot(curve.fpr, curve.tpr, lw=1.0, label=f"{c} (auc {curve.auc:.2f})")
    ax.plot(report.micro.fpr, report.micro.tpr, "k--", lw=1.5,
            label=f"micro (auc {report.micro.auc:.2f})")
    ax.plot([0, 1], [0, 1], color="grey", lw=0.5)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def loss_figure(trace, path) -> None:
    epochs = [row.epoch for row in trace]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(epochs, [row.loss for row in trace], label="total")
    ax.plot(epochs, [row.loss_edges for row in trace], label="edges", lw=0.8)
    ax.plot(epochs, [row.loss_topology for row in trace], label="topology", lw=0.8)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def inertia_figure(values: np.ndarray, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(range(1, len(values) + 1), values)
    ax.set_xlabel("iteration")
    ax.set_ylabel("inertia")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
