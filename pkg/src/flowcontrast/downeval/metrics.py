"""Accuracy, precision, recall, F1, and the confusion matrix.

All rates are percentages. Binary inputs produce the positive-class
counts alongside per-class values; multiclass metrics are one-vs-rest
with support-weighted averages. Zero denominators yield 0 and a flag
naming the affected quantity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ConfusionMatrix:
    classes: list
    counts: np.ndarray   # counts[true][pred]

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def to_rows(self) -> list[list]:
        header = ["true\\pred"] + [str(c) for c in self.classes]
        rows = [header]
        for i, c in enumerate(self.classes):
            rows.append([str(c)] + [int(x) for x in self.counts[i]])
        return rows


@dataclass
class MetricReport:
    classes: list
    accuracy: float                      # percent
    per_class: dict                      # class -> {precision, recall, f1, support}
    weighted: dict                       # precision/recall/f1, support-weighted
    confusion: ConfusionMatrix
    flags: list = field(default_factory=list)
    binary_counts: dict | None = None    # tp/fp/fn/tn when a positive class is set

    def to_json(self, **extra) -> str:
        payload = {
            "schema_version": 1,
            "classes": [str(c) for c in self.classes],
            "accuracy": self.accuracy,
            "per_class": {
                str(c): {k: v for k, v in vals.items()} for c, vals in self.per_class.items()
            },
            "weighted": self.weighted,
            "confusion": [[int(x) for x in row] for row in self.confusion.counts],
            "flags": self.flags,
        }
        if self.binary_counts is not None:
            payload["binary_counts"] = self.binary_counts
        payload.update(extra)
        return json.dumps(payload, indent=2, sort_keys=True)


def _rate(num: float, den: float, flags: list, what: str) -> float:
    if den == 0:
        flags.append(f"zero denominator for {what}")
        return 0.0
    return 100.0 * num / den


def compute_metrics(y_true, y_pred, positive=None) -> MetricReport:
    """Per-class and averaged classification metrics.

    With ``positive`` given (binary use), the report also carries the
    TP/FP/FN/TN counts of that class. Inputs must be equal-length and
    non-empty.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ValueError("cannot compute metrics on empty inputs")
    if y_true.shape != y_pred.shape:
        raise ValueError("label arrays must have the same shape")
    classes = sorted(set(y_true.tolist()) | set(y_pred.tolist()))
    pos = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.intp)
    for t, p in zip(y_true, y_pred):
        counts[pos[t], pos[p]] += 1
    confusion = ConfusionMatrix(classes=classes, counts=counts)

    flags: list[str] = []
    total = int(y_true.size)
    accuracy = 100.0 * float(np.trace(counts)) / total

    per_class: dict = {}
    for c in classes:
        i = pos[c]
        tp = float(counts[i, i])
        fp = float(counts[:, i].sum() - counts[i, i])
        fn = float(counts[i, :].sum() - counts[i, i])
        precision = _rate(tp, tp + fp, flags, f"precision of {c!r}")
        recall = _rate(tp, tp + fn, flags, f"recall of {c!r}")
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        if precision + recall == 0:
            flags.append(f"zero denominator for f1 of {c!r}")
        per_class[c] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": int(counts[i, :].sum()),
        }

    supports = np.array([per_class[c]["support"] for c in classes], dtype=np.float64)
    weighted = {}
    for key in ("precision", "recall", "f1"):
        values = np.array([per_class[c][key] for c in classes])
        weighted[key] = float((values * supports).sum() / supports.sum())

    binary_counts = None
    if positive is not None:
        if positive not in pos:
            raise ValueError(f"positive class {positive!r} not present")
        i = pos[positive]
        tp = int(counts[i, i])
        fp = int(counts[:, i].sum() - counts[i, i])
        fn = int(counts[i, :].sum() - counts[i, i])
        tn = total - tp - fp - fn
        binary_counts = {"tp": tp, "fp": fp, "fn": fn, "tn": tn}

    return MetricReport(
        classes=classes,
        accuracy=accuracy,
        per_class=per_class,
        weighted=weighted,
        confusion=confusion,
        flags=flags,
        binary_counts=binary_counts,
    )
