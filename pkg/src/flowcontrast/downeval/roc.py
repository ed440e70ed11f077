"""ROC curves: per-class one-vs-rest plus the micro average.

The micro average pools every (sample, class) decision before the
threshold sweep. Curves are swept over unique scores (ties grouped);
AUC is the trapezoid area. A class without both positives and negatives
has no defined curve and is reported as absent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float


@dataclass
class RocReport:
    classes: list
    per_class: dict            # class -> RocCurve or None
    micro: RocCurve

    def to_rows(self) -> list[list]:
        rows = [["curve", "threshold", "fpr", "tpr"]]
        for c in self.classes:
            curve = self.per_class[c]
            if curve is None:
                continue
            for t, x, y in zip(curve.thresholds, curve.fpr, curve.tpr):
                rows.append([str(c), f"{t:.17g}", f"{x:.17g}", f"{y:.17g}"])
        for t, x, y in zip(self.micro.thresholds, self.micro.fpr, self.micro.tpr):
            rows.append(["micro", f"{t:.17g}", f"{x:.17g}", f"{y:.17g}"])
        return rows

    def auc_summary(self) -> dict:
        out = {
            str(c): (None if self.per_class[c] is None else self.per_class[c].auc)
            for c in self.classes
        }
        out["micro"] = self.micro.auc
        return out


def _binary_curve(scores: np.ndarray, positives: np.ndarray) -> RocCurve | None:
    n_pos = int(positives.sum())
    n_neg = positives.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positives[order].astype(np.float64)
    # group threshold ties: keep the last index of each unique score run
    distinct = np.nonzero(np.diff(sorted_scores))[0]
    cut = np.concatenate([distinct, [positives.size - 1]])
    tp = np.cumsum(sorted_pos)[cut]
    fp = (cut + 1) - tp
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    thresholds = np.concatenate([[np.inf], sorted_scores[cut]])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=auc)


def roc_points(scores: np.ndarray, y_true, classes=None) -> RocReport:
    """Sweep ROC curves from a (samples x classes) score matrix.

    ``classes`` fixes the column order; by default the sorted distinct
    true labels are used and must match the score column count.
    """
    scores = np.asarray(scores, dtype=np.float64)
    y_true = np.asarray(y_true)
    if scores.ndim != 2:
        raise ValueError("scores must be a (samples, classes) matrix")
    if classes is None:
        classes = sorted(set(y_true.tolist()))
    if len(classes) != scores.shape[1]:
        raise ValueError("score columns must match the class list")
    if scores.shape[0] != y_true.shape[0]:
        raise ValueError("scores and labels must have the same length")

    per_class = {}
    onehot = np.zeros_like(scores)
    for j, c in enumerate(classes):
        positives = (y_true == c).astype(np.float64)
        onehot[:, j] = positives
        per_class[c] = _binary_curve(scores[:, j], positives)
    micro = _binary_curve(scores.ravel(), onehot.ravel())
    if micro is None:
        raise ValueError("micro curve undefined: labels contain a single class")
    return RocReport(classes=list(classes), per_class=per_class, micro=micro)
