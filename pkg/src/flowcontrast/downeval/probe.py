"""Linear probe on frozen embeddings.

A single affine layer trained with full-batch Adam: sigmoid plus binary
cross-entropy for two classes, softmax plus cross-entropy otherwise. The
embeddings are never touched, so probe accuracy measures representation
quality alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataError
from ..numcore import AdamState, adam_step
from ..numcore.functional import logsumexp


@dataclass
class ProbeResult:
    classes: np.ndarray
    weights: np.ndarray      # (C, d) or (1, d) for binary
    bias: np.ndarray
    binary: bool
    loss_trace: list

    def scores(self, embeddings: np.ndarray) -> np.ndarray:
        """Class-probability matrix, one column per class."""
        x = np.asarray(embeddings, dtype=np.float64)
        logits = x @ self.weights.T + self.bias
        if self.binary:
            p = 1.0 / (1.0 + np.exp(-logits[:, 0]))
            return np.stack([1.0 - p, p], axis=1)
        shifted = logits - logits.max(axis=1, keepdims=True)
        expd = np.exp(shifted)
        return expd / expd.sum(axis=1, keepdims=True)

    def predict(self, embeddings: np.ndarray) -> np.ndarray:
        return self.classes[self.scores(embeddings).argmax(axis=1)]


def linear_probe(embeddings: np.ndarray, labels, epochs: int = 200,
                 lr: float = 0.05) -> ProbeResult:
    """Train the affine probe; zero epochs returns the initialization."""
    x = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise DegenerateDataError("probe needs at least two classes")
    n, d = x.shape
    class_pos = {c: i for i, c in enumerate(classes)}
    y = np.array([class_pos[c] for c in labels])
    binary = classes.size == 2
    rows = 1 if binary else classes.size
    params = {"w": np.zeros((rows, d)), "b": np.zeros(rows)}
    state = AdamState(lr=lr)
    trace: list[float] = []
    for _ in range(epochs):
        logits = x @ params["w"].T + params["b"]
        if binary:
            z = logits[:, 0]
            p = 1.0 / (1.0 + np.exp(-z))
            # stable log-loss via logaddexp(0, +-z)
            loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
            dz = (p - y)[:, None] / n
        else:
            norm = np.array([logsumexp(row) for row in logits])
            loss = float(np.mean(norm - logits[np.arange(n), y]))
            p = np.exp(logits - norm[:, None])
            p[np.arange(n), y] -= 1.0
            dz = p / n
        trace.append(loss)
        grads = {"w": dz.T @ x, "b": dz.sum(axis=0)}
        params = adam_step(params, grads, state)
    return ProbeResult(
        classes=classes,
        weights=params["w"],
        bias=params["b"],
        binary=binary,
        loss_trace=trace,
    )
