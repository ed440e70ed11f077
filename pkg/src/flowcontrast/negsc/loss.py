"""Structured contrastive loss over subgraph pairs.

Two symmetric branches: one driven by the Wasserstein distance between
edge-embedding sets, one by the Gromov-Wasserstein distance between
subgraph topologies. Positive pairs (same center) contribute their
distance directly through the log-exp simplification; negative pairs
contribute log(1 - exp(-d / temperature)) with the log argument floored
at 1e-7 so a zero-distance negative stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..numcore import tape as tp
from .subgraphs import Subgraph
from .transport import (
    edge_cost_matrix,
    gromov_wd,
    sinkhorn_wd,
    uniform_weights,
)

LOG_FLOOR = 1e-7


@dataclass
class LossBreakdown:
    total: float
    edges: float
    topology: float
    positive_wd: list = field(default_factory=list)
    positive_gwd: list = field(default_factory=list)
    negative_wd: dict = field(default_factory=dict)    # (i, j) -> distance
    negative_gwd: dict = field(default_factory=dict)


def assemble_loss_t(wd_pos, gwd_pos, wd_neg, gwd_neg, temperature: float):
    """Combine per-pair distance tensors into the scalar loss.

    ``wd_pos``/``gwd_pos`` hold one 0-d tensor per pair; ``wd_neg`` and
    ``gwd_neg`` hold a list of tensors per pair. Returns (total, edge
    branch, topology branch) tensors.
    """
    n = len(wd_pos)
    n_neg = len(wd_neg[0]) if wd_neg else 0
    scale = 1.0 / (n * (n_neg + 1))

    def branch(pos, negs):
        total = None
        for i in range(n):
            term = pos[i] / temperature
            for d in negs[i]:
                repelled = tp.clamp_min(1.0 - tp.exp(-d / temperature), LOG_FLOOR)
                term = term - tp.log(repelled)
            total = term if total is None else total + term
        return total * scale

    edges = branch(wd_pos, wd_neg)
    topology = branch(gwd_pos, gwd_neg)
    return edges + topology, edges, topology


def contrastive_loss(
    pairs: list[tuple[Subgraph, Subgraph]],
    negatives: list[list[int]],
    temperature: float,
    epsilon: float = 0.05,
    sinkhorn_iters: int = 200,
    sinkhorn_tol: float = 1e-6,
    gwd_outer: int = 10,
) -> tuple[float, LossBreakdown]:
    """Loss over (sampled, generated) pairs with explicit negative index sets.

    ``negatives[i]`` lists the indices whose generated subgraphs serve as
    negatives for pair i; every index must differ from i.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if len(negatives) != len(pairs):
        raise ValueError("need one negative index set per pair")
    n_neg = len(negatives[0]) if negatives else 0
    for i, negs in enumerate(negatives):
        if i in negs:
            raise ValueError(f"pair {i} cannot be its own negative")
        if len(negs) != n_neg:
            raise ValueError("all pairs must have the same number of negatives")

    breakdown = LossBreakdown(total=0.0, edges=0.0, topology=0.0)

    def wd(i: int, j: int) -> float:
        s, g = pairs[i][0], pairs[j][1]
        value, _ = sinkhorn_wd(
            edge_cost_matrix(s, g),
            uniform_weights(s.n_edges),
            uniform_weights(g.n_edges),
            epsilon,
            sinkhorn_iters,
            sinkhorn_tol,
        )
        return value

    def gwd(i: int, j: int) -> float:
        value, _ = gromov_wd(
            pairs[i][0], pairs[j][1], epsilon, gwd_outer, sinkhorn_iters, sinkhorn_tol
        )
        return value

    wd_pos, gwd_pos, wd_neg, gwd_neg = [], [], [], []
    for i in range(len(pairs)):
        breakdown.positive_wd.append(wd(i, i))
        breakdown.positive_gwd.append(gwd(i, i))
        wd_pos.append(tp.leaf(breakdown.positive_wd[-1]))
        gwd_pos.append(tp.leaf(breakdown.positive_gwd[-1]))
        wd_i, gwd_i = [], []
        for j in negatives[i]:
            breakdown.negative_wd[(i, j)] = wd(i, j)
            breakdown.negative_gwd[(i, j)] = gwd(i, j)
            wd_i.append(tp.leaf(breakdown.negative_wd[(i, j)]))
            gwd_i.append(tp.leaf(breakdown.negative_gwd[(i, j)]))
        wd_neg.append(wd_i)
        gwd_neg.append(gwd_i)

    total, edges, topology = assemble_loss_t(wd_pos, gwd_pos, wd_neg, gwd_neg, temperature)
    breakdown.total = total.item()
    breakdown.edges = edges.item()
    breakdown.topology = topology.item()
    return breakdown.total, breakdown
