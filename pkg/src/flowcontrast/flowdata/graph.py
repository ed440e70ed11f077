"""Endpoint graph built from flow records.

Nodes are endpoints (ip, or ip:port), edges are individual flows: the
graph is an undirected multigraph where parallel flows stay separate
edges and a flow from an endpoint to itself becomes a self-loop. Nodes
carry a constant all-ones feature vector; all signal lives on the edges.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .ingest import FlowRecord

NODE_KEYS = ("ip", "ip:port")


@dataclass
class FlowGraph:
    """Immutable after construction; safe to share across threads."""

    node_ids: list[str]
    edge_src: np.ndarray            # (m,) node indices, flow source side
    edge_dst: np.ndarray            # (m,) node indices, flow destination side
    edge_features: np.ndarray       # (m, feature_dim)
    record_index: np.ndarray        # (m,) row in the originating record list
    incident: list[list[int]] = field(default_factory=list)  # node -> edge ids, each once
    node_dim: int = 1

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return int(self.edge_src.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.edge_features.shape[1])

    def node_features(self) -> np.ndarray:
        return np.ones((self.n_nodes, self.node_dim))

    def degree(self, v: int) -> int:
        """Incidence count; a self-loop contributes two."""
        return sum(2 if self.edge_src[e] == self.edge_dst[e] else 1 for e in self.incident[v])

    def other_endpoint(self, edge: int, v: int) -> int:
        s, d = int(self.edge_src[edge]), int(self.edge_dst[edge])
        return d if s == v else s

    def neighbors(self, v: int) -> list[int]:
        """Distinct neighboring nodes, excluding v itself, sorted."""
        out = {self.other_endpoint(e, v) for e in self.incident[v]}
        out.discard(v)
        return sorted(out)


def _node_key(rec: FlowRecord, side: str, node_key: str) -> str:
    ip = rec.src_ip if side == "src" else rec.dst_ip
    if node_key == "ip":
        return ip
    port = rec.src_port if side == "src" else rec.dst_port
    return f"{ip}:{port}"


def build_graph(
    records: list[FlowRecord],
    features: np.ndarray,
    node_key: str = "ip",
    node_dim: int = 1,
) -> FlowGraph:
    """One edge per record; node set is the distinct endpoints.

    ``features`` must have one row per record (the standardized edge
    features). Node order follows first appearance in the record list so
    construction is deterministic.
    """
    if node_key not in NODE_KEYS:
        raise ConfigError(f"node_key must be one of {NODE_KEYS}, got {node_key!r}")
    if len(records) != features.shape[0]:
        raise ValueError("feature matrix rows must match record count")
    index: dict[str, int] = {}
    node_ids: list[str] = []
    src = np.zeros(len(records), dtype=np.intp)
    dst = np.zeros(len(records), dtype=np.intp)
    for i, rec in enumerate(records):
        for side, arr in (("src", src), ("dst", dst)):
            key = _node_key(rec, side, node_key)
            if key not in index:
                index[key] = len(node_ids)
                node_ids.append(key)
            arr[i] = index[key]
    incident: list[list[int]] = [[] for _ in node_ids]
    for e in range(len(records)):
        incident[src[e]].append(e)
        if dst[e] != src[e]:
            incident[dst[e]].append(e)
    return FlowGraph(
        node_ids=node_ids,
        edge_src=src,
        edge_dst=dst,
        edge_features=np.asarray(features, dtype=np.float64),
        record_index=np.arange(len(records), dtype=np.intp),
        incident=incident,
        node_dim=node_dim,
    )


def dump_graph(graph: FlowGraph, edges_path, meta_path, config_hash: str = "") -> None:
    """Write the canonical debug dump: CSV edge list plus JSON metadata."""
    edges_path, meta_path = Path(edges_path), Path(meta_path)
    with edges_path.open("w", newline="", encoding="utf-8") as fh:
        if config_hash:
            fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(
            ["edge_id", "src", "dst", "record_index"]
            + [f"f{j}" for j in range(graph.feature_dim)]
        )
        for e in range(graph.n_edges):
            writer.writerow(
                [e, graph.node_ids[graph.edge_src[e]], graph.node_ids[graph.edge_dst[e]],
                 int(graph.record_index[e])]
                + [f"{x:.17g}" for x in graph.edge_features[e]]
            )
    meta = {
        "schema_version": 1,
        "config_hash": config_hash,
        "n_nodes": graph.n_nodes,
        "n_edges": graph.n_edges,
        "feature_dim": graph.feature_dim,
        "node_dim": graph.node_dim,
        "node_ids": graph.node_ids,
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_graph(edges_path, meta_path) -> FlowGraph:
    meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    node_ids = list(meta["node_ids"])
    index = {nid: i for i, nid in enumerate(node_ids)}
    src, dst, rec_idx, feats = [], [], [], []
    with Path(edges_path).open(newline="", encoding="utf-8") as fh:
        rows = (line for line in fh if not line.startswith("#"))
        reader = csv.reader(rows)
        header = next(reader)
        n_feat = len(header) - 4
        for row in reader:
            src.append(index[row[1]])
            dst.append(index[row[2]])
            rec_idx.append(int(row[3]))
            feats.append([float(x) for x in row[4 : 4 + n_feat]])
    src = np.asarray(src, dtype=np.intp)
    dst = np.asarray(dst, dtype=np.intp)
    incident: list[list[int]] = [[] for _ in node_ids]
    for e in range(len(src)):
        incident[src[e]].append(e)
        if dst[e] != src[e]:
            incident[dst[e]].append(e)
    return FlowGraph(
        node_ids=node_ids,
        edge_src=src,
        edge_dst=dst,
        edge_features=np.asarray(feats, dtype=np.float64).reshape(len(src), meta["feature_dim"]),
        record_index=np.asarray(rec_idx, dtype=np.intp),
        incident=incident,
        node_dim=int(meta["node_dim"]),
    )
