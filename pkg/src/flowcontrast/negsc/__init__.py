"""Self-supervised subgraph-contrast objective and training loop."""

from .generator import GeneratorParams, generate_contrastive, init_generator
from .loss import LossBreakdown, contrastive_loss
from .subgraphs import Subgraph, extract_subgraph, sample_centers
from .train import ContrastConfig, EpochStats, TrainResult, epoch_loss_and_grads, train
from .transport import TransportPlan, edge_cost_matrix, gromov_wd, sinkhorn_wd

__all__ = [
    "ContrastConfig",
    "EpochStats",
    "GeneratorParams",
    "LossBreakdown",
    "Subgraph",
    "TrainResult",
    "TransportPlan",
    "contrastive_loss",
    "edge_cost_matrix",
    "epoch_loss_and_grads",
    "extract_subgraph",
    "generate_contrastive",
    "gromov_wd",
    "init_generator",
    "sample_centers",
    "sinkhorn_wd",
    "train",
]
