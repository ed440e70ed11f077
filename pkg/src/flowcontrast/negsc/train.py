"""Self-supervised training loop and its gradient-check entry point.

Each epoch re-encodes the graph, samples center subgraphs, generates their
contrastive counterparts, solves the transport problems, and takes one
Adam step over the union of encoder and generator parameters. Transport
plans are held fixed in the backward pass (envelope-style); the same
frozen-plan definition of the loss is what the finite-difference check
differentiates, so analytic and numeric gradients agree.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, NumericError
from ..negat import EncoderParams, encode_graph_taped
from ..numcore import AdamState, adam_step
from ..numcore import tape as tp
from .generator import GeneratorParams, generate_taped
from .loss import assemble_loss_t
from .subgraphs import Subgraph, extract_structure, sample_centers
from .transport import cosine_cost_t, gromov_wd, gw_objective_t, sinkhorn_wd, uniform_weights


@dataclass
class ContrastConfig:
    """Everything the contrastive objective and loop need."""

    centers: int = 64            # subgraph pairs sampled per epoch
    neighbors: int = 4           # direct neighbors per subgraph
    negatives: int = 5           # negative pairs per subgraph
    temperature: float = 0.2
    epsilon: float = 0.05        # entropic regularization for both distances
    sinkhorn_iters: int = 200
    sinkhorn_tol: float = 1e-6
    gwd_outer: int = 10
    learning_rate: float = 1e-3
    epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.negatives >= 1 and self.centers < 2:
            raise ConfigError("need at least 2 centers to draw negatives")
        if self.negatives > self.centers - 1:
            raise ConfigError("negatives cannot exceed centers - 1")
        if self.neighbors < 1:
            raise ConfigError("need at least one neighbor per subgraph")
        for name in ("centers", "sinkhorn_iters", "gwd_outer"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.epochs < 0 or self.learning_rate < 0:
            raise ConfigError("epochs and learning_rate must be nonnegative")


@dataclass
class EpochStats:
    epoch: int
    loss: float
    loss_edges: float
    loss_topology: float
    wall_time: float


@dataclass
class TrainResult:
    encoder: EncoderParams
    generator: GeneratorParams
    trace: list[EpochStats]


@dataclass
class FrozenBatch:
    """A sampled batch plus its converged transport plans.

    Reusing a frozen batch makes the loss a deterministic function of the
    parameters alone, which is the function the finite-difference check
    probes.
    """

    subgraphs: list[Subgraph]
    negatives: list[list[int]]
    wd_plans: dict = field(default_factory=dict)
    gwd_plans: dict = field(default_factory=dict)


def _sample_batch(graph, config: ContrastConfig, rng) -> FrozenBatch:
    centers = sample_centers(graph, config.centers, config.neighbors, rng)
    n = len(centers)
    n_neg = min(config.negatives, n - 1)
    if n_neg < config.negatives:
        warnings.warn(
            f"shrinking negatives to {n_neg}: only {n} eligible centers", stacklevel=2
        )
    subs = [extract_structure(graph, c, config.neighbors, rng) for c in centers]
    negatives: list[list[int]] = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        if n_neg:
            pick = rng.choice(len(others), size=n_neg, replace=False)
            negatives.append([others[k] for k in pick])
        else:
            negatives.append([])
    return FrozenBatch(subgraphs=subs, negatives=negatives)


def batch_loss_t(graph, leaves: dict, encoder: EncoderParams, config: ContrastConfig,
                 rng=None, frozen: FrozenBatch | None = None):
    """Taped loss of one batch; returns (total, edges, topology, frozen).

    With ``frozen=None`` a fresh batch is sampled from ``rng`` and the
    transport plans are solved and recorded; otherwise structure and plans
    are reused and no solver runs.
    """
    z_nodes, z_edges = encode_graph_taped(graph, leaves, encoder)
    solve = frozen is None
    if solve:
        frozen = _sample_batch(graph, config, rng)
    subs = frozen.subgraphs
    n = len(subs)

    s_nodes = [tp.take_rows(z_nodes, sub.nodes) for sub in subs]
    s_edges = [tp.take_rows(z_edges, sub.edge_ids) for sub in subs]
    generated = [
        generate_taped(sub, s_nodes[i], s_edges[i], leaves)
        for i, sub in enumerate(subs)
    ]
    g_nodes = [pair[0] for pair in generated]
    g_edges = [pair[1] for pair in generated]

    def wd_term(i: int, j: int):
        cost_t = cosine_cost_t(s_edges[i], g_edges[j])
        if solve:
            _, plan = sinkhorn_wd(
                cost_t.data,
                uniform_weights(subs[i].n_edges),
                uniform_weights(subs[j].n_edges),
                config.epsilon,
                config.sinkhorn_iters,
                config.sinkhorn_tol,
            )
            frozen.wd_plans[(i, j)] = plan.plan
        return tp.tsum(tp.mul(tp.leaf(frozen.wd_plans[(i, j)]), cost_t))

    def gwd_term(i: int, j: int):
        if solve:
            s_view = subs[i].with_embeddings(s_nodes[i].data, s_edges[i].data, "sampled")
            g_view = subs[j].with_embeddings(g_nodes[j].data, g_edges[j].data, "generated")
            _, plan = gromov_wd(
                s_view, g_view, config.epsilon,
                config.gwd_outer, config.sinkhorn_iters, config.sinkhorn_tol,
            )
            frozen.gwd_plans[(i, j)] = plan.plan
        return gw_objective_t(
            frozen.gwd_plans[(i, j)], subs[i], subs[j], s_nodes[i], g_nodes[j]
        )

    wd_pos = [wd_term(i, i) for i in range(n)]
    gwd_pos = [gwd_term(i, i) for i in range(n)]
    wd_neg = [[wd_term(i, j) for j in frozen.negatives[i]] for i in range(n)]
    gwd_neg = [[gwd_term(i, j) for j in frozen.negatives[i]] for i in range(n)]

    total, edges, topology = assemble_loss_t(
        wd_pos, gwd_pos, wd_neg, gwd_neg, config.temperature
    )
    return total, edges, topology, frozen


def train(graph, encoder: EncoderParams, generator: GeneratorParams,
          config: ContrastConfig) -> TrainResult:
    """Optimize encoder and generator under the contrastive objective."""
    rng = np.random.default_rng(config.seed)
    params = {**encoder.as_dict(), **generator.as_dict()}
    params = {k: np.array(v, dtype=np.float64) for k, v in params.items()}
    state = AdamState(lr=config.learning_rate)
    trace: list[EpochStats] = []
    for epoch in range(config.epochs):
        started = time.perf_counter()
        leaves = {k: tp.leaf(v) for k, v in params.items()}
        total, edges, topology, _ = batch_loss_t(graph, leaves, encoder, config, rng=rng)
        loss = total.item()
        if not np.isfinite(loss):
            raise NumericError(
                f"non-finite loss at epoch {epoch}: "
                f"edges={edges.item()!r} topology={topology.item()!r}"
            )
        total.backward()
        grads = {k: leaves[k].grad for k in params}
        params = adam_step(params, grads, state)
        trace.append(
            EpochStats(
                epoch=epoch,
                loss=loss,
                loss_edges=edges.item(),
                loss_topology=topology.item(),
                wall_time=time.perf_counter() - started,
            )
        )
    return TrainResult(
        encoder=encoder.replace_arrays(params),
        generator=generator.replace_arrays(params),
        trace=trace,
    )


def epoch_loss_and_grads(graph, encoder: EncoderParams, generator: GeneratorParams,
                         config: ContrastConfig, frozen: FrozenBatch | None = None):
    """One-batch loss value and gradients for every parameter.

    Returns ``(value, grads, frozen)``. Passing the returned ``frozen``
    back in re-evaluates the same batch with the same fixed transport
    plans, which is the detached-plan loss the gradient check probes.
    """
    params = {**encoder.as_dict(), **generator.as_dict()}
    leaves = {k: tp.leaf(np.asarray(v, dtype=np.float64)) for k, v in params.items()}
    rng = np.random.default_rng(config.seed) if frozen is None else None
    total, _, _, frozen = batch_loss_t(graph, leaves, encoder, config, rng=rng, frozen=frozen)
    total.backward()
    grads = {k: leaves[k].grad for k in params}
    return total.item(), grads, frozen
