"""Downstream evaluation on frozen embeddings: clustering, probe, metrics."""

from .cluster import KMeansResult, kmeans_embed, map_clusters
from .metrics import ConfusionMatrix, MetricReport, compute_metrics
from .probe import ProbeResult, linear_probe
from .roc import RocReport, roc_points

__all__ = [
    "ConfusionMatrix",
    "KMeansResult",
    "MetricReport",
    "ProbeResult",
    "RocReport",
    "compute_metrics",
    "kmeans_embed",
    "linear_probe",
    "map_clusters",
    "roc_points",
]
