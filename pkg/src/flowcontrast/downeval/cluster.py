"""K-means over edge embeddings and optimal cluster-label matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class KMeansResult:
    assignments: np.ndarray       # (n,) cluster index per sample
    centroids: np.ndarray         # (k, d)
    inertia: float
    iterations: int
    inertia_trace: list


def _plus_plus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Spread initial centroids with distance-squared weighting."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = points[first]
    dist2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = dist2.sum()
        if total <= 0.0:
            # all remaining points coincide with a centroid; reuse any point
            choice = int(rng.integers(n))
        else:
            choice = int(rng.choice(n, p=dist2 / total))
        centroids[j] = points[choice]
        dist2 = np.minimum(dist2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def kmeans_embed(embeddings: np.ndarray, n_clusters: int, seed: int,
                 max_iter: int = 100, n_init: int = 8) -> KMeansResult:
    """Best of ``n_init`` k-means++ starts by final inertia; seed-deterministic.

    Within each start, Lloyd iterations run until assignments stabilize;
    inertia is non-increasing across iterations and empty clusters are
    reseeded with the point farthest from its centroid.
    """
    best: KMeansResult | None = None
    for restart in range(max(1, n_init)):
        result = _kmeans_once(embeddings, n_clusters, seed + restart, max_iter)
        if best is None or result.inertia < best.inertia:
            best = result
    return best


def _kmeans_once(embeddings: np.ndarray, n_clusters: int, seed: int,
                 max_iter: int) -> KMeansResult:
    points = np.asarray(embeddings, dtype=np.float64)
    n = points.shape[0]
    if n_clusters < 1:
        raise ValueError("need at least one cluster")
    if n_clusters > n:
        raise ValueError(f"cannot form {n_clusters} clusters from {n} samples")
    rng = np.random.default_rng(seed)
    centroids = _plus_plus_init(points, n_clusters, rng)
    assignments = np.zeros(n, dtype=np.intp)
    trace: list[float] = []
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        dist2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = dist2.argmin(axis=1)
        for j in range(n_clusters):
            members = new_assign == j
            if members.any():
                centroids[j] = points[members].mean(axis=0)
            else:
                farthest = int(dist2[np.arange(n), new_assign].argmax())
                centroids[j] = points[farthest]
                new_assign[farthest] = j
        inertia = float(((points - centroids[new_assign]) ** 2).sum())
        trace.append(inertia)
        if it > 1 and np.array_equal(new_assign, assignments):
            assignments = new_assign
            break
        assignments = new_assign
    return KMeansResult(
        assignments=assignments,
        centroids=centroids,
        inertia=trace[-1],
        iterations=iterations,
        inertia_trace=trace,
    )


def map_clusters(assignments: np.ndarray, labels) -> tuple[dict, float]:
    """Best one-to-one cluster-to-label mapping, surplus clusters by majority.

    The one-to-one part maximizes matched samples over the contingency
    table (Hungarian assignment); returns (mapping, accuracy) where
    accuracy is the matched fraction after mapping every cluster.
    """
    assignments = np.asarray(assignments)
    labels = np.asarray(labels)
    if assignments.shape[0] != labels.shape[0]:
        raise ValueError("assignments and labels must have the same length")
    clusters = np.unique(assignments)
    classes = np.unique(labels)
    table = np.zeros((clusters.size, classes.size), dtype=np.intp)
    cluster_pos = {c: i for i, c in enumerate(clusters)}
    class_pos = {c: j for j, c in enumerate(classes)}
    for a, y in zip(assignments, labels):
        table[cluster_pos[a], class_pos[y]] += 1
    rows, cols = linear_sum_assignment(-table)
    mapping = {clusters[r]: classes[c] for r, c in zip(rows, cols)}
    for i, c in enumerate(clusters):
        if c not in mapping:
            mapping[c] = classes[int(table[i].argmax())]
    matched = sum(table[cluster_pos[c], class_pos[mapping[c]]] for c in clusters)
    return mapping, float(matched) / labels.shape[0]
