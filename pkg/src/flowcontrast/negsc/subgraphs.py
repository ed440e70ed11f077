"""Center-node subgraph sampling.

A subgraph is a center plus a fixed number of its distinct direct
neighbors, with every graph edge between selected nodes kept (so the
diameter is at most 2). Parallel edges collapse to the lowest-id
representative and self-loops are dropped, keeping subgraphs simple for
the pairwise topology costs downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError
from ..negat import GraphEmbedding


def as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


@dataclass
class Subgraph:
    """A sampled subgraph or its generated counterpart.

    ``nodes`` lists graph node ids with the center first. For a generated
    subgraph the structure (nodes, edges) is copied one-to-one from its
    source and only the embeddings differ.
    """

    center: int
    nodes: np.ndarray        # (n_sub,) graph node ids, nodes[0] == center
    edge_ids: np.ndarray     # (m_sub,) graph edge ids, ascending
    edges_local: np.ndarray  # (m_sub, 2) local endpoint indices, flow orientation
    node_emb: np.ndarray     # (n_sub, d)
    edge_emb: np.ndarray     # (m_sub, 2d)
    kind: str = "sampled"

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edge_ids)

    def local_neighbors(self, v: int) -> tuple[list[int], list[int]]:
        """(edge slots, neighbor local ids) incident to local node v."""
        slots, nbrs = [], []
        for slot, (i, j) in enumerate(self.edges_local):
            if i == v:
                slots.append(slot)
                nbrs.append(int(j))
            elif j == v:
                slots.append(slot)
                nbrs.append(int(i))
        return slots, nbrs

    def ordered_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Both orientations of every edge, as parallel (v, u) index arrays."""
        i = self.edges_local[:, 0]
        j = self.edges_local[:, 1]
        return np.concatenate([i, j]), np.concatenate([j, i])

    def with_embeddings(self, node_emb: np.ndarray, edge_emb: np.ndarray, kind: str) -> "Subgraph":
        return replace(self, node_emb=node_emb, edge_emb=edge_emb, kind=kind)


def sample_centers(graph, n_centers: int, n_neighbors: int, seed_or_rng) -> list[int]:
    """Draw distinct center nodes with at least ``n_neighbors`` distinct neighbors.

    Shrinks the request with a warning when fewer nodes are eligible;
    raises :class:`ConfigError` when none are.
    """
    rng = as_rng(seed_or_rng)
    eligible = [v for v in range(graph.n_nodes) if len(graph.neighbors(v)) >= n_neighbors]
    if not eligible:
        raise ConfigError(
            f"no node has {n_neighbors} distinct neighbors; graph too sparse for sampling"
        )
    if len(eligible) < n_centers:
        warnings.warn(
            f"only {len(eligible)} of the requested {n_centers} centers are eligible",
            stacklevel=2,
        )
        n_centers = len(eligible)
    pick = rng.choice(len(eligible), size=n_centers, replace=False)
    return [eligible[i] for i in pick]


def extract_structure(graph, center: int, n_neighbors: int, seed_or_rng) -> Subgraph:
    """Sample the node set and induced edges; embeddings left empty."""
    rng = as_rng(seed_or_rng)
    nbrs = graph.neighbors(center)
    if len(nbrs) < n_neighbors:
        raise ValueError(
            f"node {center} has {len(nbrs)} distinct neighbors, need {n_neighbors}"
        )
    pick = rng.choice(len(nbrs), size=n_neighbors, replace=False)
    nodes = [center] + [nbrs[i] for i in pick]
    local = {g: l for l, g in enumerate(nodes)}
    best: dict[tuple[int, int], int] = {}
    for g_node in nodes:
        for e in graph.incident[g_node]:
            s, d = int(graph.edge_src[e]), int(graph.edge_dst[e])
            if s == d or s not in local or d not in local:
                continue
            key = (min(s, d), max(s, d))
            if key not in best or e < best[key]:
                best[key] = e
    edge_ids = np.array(sorted(best.values()), dtype=np.intp)
    edges_local = np.array(
        [[local[int(graph.edge_src[e])], local[int(graph.edge_dst[e])]] for e in edge_ids],
        dtype=np.intp,
    ).reshape(len(edge_ids), 2)
    return Subgraph(
        center=center,
        nodes=np.asarray(nodes, dtype=np.intp),
        edge_ids=edge_ids,
        edges_local=edges_local,
        node_emb=np.zeros((len(nodes), 0)),
        edge_emb=np.zeros((len(edge_ids), 0)),
        kind="sampled",
    )


def extract_subgraph(graph, embedding: GraphEmbedding, center: int,
                     n_neighbors: int, seed_or_rng) -> Subgraph:
    """Sample a subgraph around ``center`` and copy its embeddings."""
    sub = extract_structure(graph, center, n_neighbors, seed_or_rng)
    return sub.with_embeddings(
        node_emb=embedding.node_emb[sub.nodes],
        edge_emb=embedding.edge_emb[sub.edge_ids],
        kind="sampled",
    )
