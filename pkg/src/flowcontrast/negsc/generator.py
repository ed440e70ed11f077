"""Contrastive-subgraph generation by local interpolation.

For every node of a sampled subgraph the generator produces a new
embedding from an attention-weighted combination of the node, its
in-subgraph neighbors, and the connecting edges; edges are copied
one-to-one and their embeddings rebuilt as endpoint concatenations. The
generator has its own parameters, disjoint from the encoder's.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..negat import LEAKY_SLOPE, glorot
from ..numcore import tape as tp
from .subgraphs import Subgraph


@dataclass
class GeneratorParams:
    """One attention head acting on the encoder's embedding space."""

    w_node: np.ndarray   # (p, d)
    w_edge: np.ndarray   # (p, 2d)
    attn: np.ndarray     # (3p,)
    w_comb: np.ndarray   # (d, 4d)

    @property
    def embed_dim(self) -> int:
        return int(self.w_node.shape[1])

    def as_dict(self, prefix: str = "gen") -> dict[str, np.ndarray]:
        return {
            f"{prefix}.w_node": self.w_node,
            f"{prefix}.w_edge": self.w_edge,
            f"{prefix}.attn": self.attn,
            f"{prefix}.w_comb": self.w_comb,
        }

    def replace_arrays(self, arrays: dict[str, np.ndarray], prefix: str = "gen") -> "GeneratorParams":
        return GeneratorParams(
            w_node=np.asarray(arrays[f"{prefix}.w_node"], dtype=np.float64),
            w_edge=np.asarray(arrays[f"{prefix}.w_edge"], dtype=np.float64),
            attn=np.asarray(arrays[f"{prefix}.attn"], dtype=np.float64),
            w_comb=np.asarray(arrays[f"{prefix}.w_comb"], dtype=np.float64),
        )


def init_generator(embed_dim: int, d_proj: int = 32, seed: int = 0) -> GeneratorParams:
    rng = np.random.default_rng(seed)
    return GeneratorParams(
        w_node=glorot(rng, d_proj, embed_dim),
        w_edge=glorot(rng, d_proj, 2 * embed_dim),
        attn=glorot(rng, 1, 3 * d_proj, shape=(3 * d_proj,)),
        w_comb=glorot(rng, embed_dim, 4 * embed_dim),
    )


def generate_taped(sub: Subgraph, node_emb, edge_emb, leaves: dict, prefix: str = "gen"):
    """Taped interpolation; returns (generated node, generated edge) tensors.

    ``node_emb`` and ``edge_emb`` are the sampled subgraph's embedding
    tensors (rows aligned with ``sub.nodes`` / ``sub.edge_ids``).
    """
    w_node = tp.as_tensor(leaves[f"{prefix}.w_node"])
    w_edge = tp.as_tensor(leaves[f"{prefix}.w_edge"])
    attn = tp.as_tensor(leaves[f"{prefix}.attn"])
    w_comb = tp.as_tensor(leaves[f"{prefix}.w_comb"])
    p = w_node.data.shape[0]
    d = w_comb.data.shape[0]

    pn = tp.matmul(node_emb, tp.transpose(w_node))   # (n_sub, p)
    pe = tp.matmul(edge_emb, tp.transpose(w_edge))   # (m_sub, p)
    l_self = tp.matmul(pn, tp.slice1d(attn, 0, p))
    l_edge = tp.matmul(pe, tp.slice1d(attn, p, 2 * p))
    l_nbr = tp.matmul(pn, tp.slice1d(attn, 2 * p, 3 * p))

    rows = []
    for v in range(sub.n_nodes):
        slots, nbrs = sub.local_neighbors(v)
        if not slots:
            rows.append(tp.leaf(np.zeros(d)))
            continue
        deg = len(slots)
        logits = (
            tp.take_rows(l_self, [v] * deg)
            + tp.take_rows(l_edge, slots)
            + tp.take_rows(l_nbr, nbrs)
        )
        alpha = tp.softmax(tp.leaky_relu(logits, LEAKY_SLOPE))
        msg_in = tp.concat(
            [
                tp.take_rows(node_emb, [v] * deg),
                tp.take_rows(edge_emb, slots),
                tp.take_rows(node_emb, nbrs),
            ],
            axis=1,
        )
        messages = tp.matmul(msg_in, tp.transpose(w_comb))
        rows.append(tp.relu(tp.matmul(alpha, messages)))
    gen_nodes = tp.stack_rows(rows)
    gen_edges = tp.concat(
        [
            tp.take_rows(gen_nodes, sub.edges_local[:, 0]),
            tp.take_rows(gen_nodes, sub.edges_local[:, 1]),
        ],
        axis=1,
    )
    return gen_nodes, gen_edges


def generate_contrastive(sub: Subgraph, gen: GeneratorParams) -> Subgraph:
    """Build the generated counterpart of a sampled subgraph."""
    if sub.kind != "sampled":
        raise ValueError("can only generate from a sampled subgraph")
    nodes_t, edges_t = generate_taped(
        sub, tp.leaf(sub.node_emb), tp.leaf(sub.edge_emb), gen.as_dict()
    )
    return sub.with_embeddings(nodes_t.data, edges_t.data, kind="generated")
