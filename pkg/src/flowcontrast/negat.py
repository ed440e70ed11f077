"""Edge-featured multi-head graph attention encoder.

Every layer recomputes, per node and head, an attention distribution over
the node's incident edges; the attended messages combine the node's own
state, the edge features, and the neighbor state. Head outputs are
concatenated. Final edge embeddings are the concatenation of the two
endpoint states, so the edge (not the node) is the classification object.

Node features are a constant all-ones vector: all information enters
through edges. Edge features are not recomputed across layers; a layer
beyond the first reuses the raw edge features next to the updated node
states. Multigraph semantics: parallel edges get their own attention
slots, a self-loop contributes a single slot whose neighbor is the node
itself. Isolated nodes map to the zero state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numcore import tape as tp

LEAKY_SLOPE = 0.2


@dataclass
class HeadParams:
    """One attention head: projections, attention vector, message matrix."""

    w_node: np.ndarray   # (d_proj, node_in)
    w_edge: np.ndarray   # (d_proj, edge_in)
    attn: np.ndarray     # (3 * d_proj,)
    w_agg: np.ndarray    # (d_out, 2 * node_in + edge_in)


@dataclass
class EncoderParams:
    heads: list[list[HeadParams]]   # [layer][head]
    node_dim: int
    edge_dim: int
    d_proj: int
    d_out: int

    @property
    def n_layers(self) -> int:
        return len(self.heads)

    @property
    def n_heads(self) -> int:
        return len(self.heads[0])

    @property
    def embed_dim(self) -> int:
        """Dimension of the final node state."""
        return self.n_heads * self.d_out

    def node_in(self, layer: int) -> int:
        return self.node_dim if layer == 0 else self.embed_dim

    def as_dict(self, prefix: str = "enc") -> dict[str, np.ndarray]:
        out = {}
        for k, layer in enumerate(self.heads):
            for i, head in enumerate(layer):
                base = f"{prefix}.l{k}.h{i}"
                out[f"{base}.w_node"] = head.w_node
                out[f"{base}.w_edge"] = head.w_edge
                out[f"{base}.attn"] = head.attn
                out[f"{base}.w_agg"] = head.w_agg
        return out

    def replace_arrays(self, arrays: dict[str, np.ndarray], prefix: str = "enc") -> "EncoderParams":
        heads = []
        for k in range(self.n_layers):
            layer = []
            for i in range(self.n_heads):
                base = f"{prefix}.l{k}.h{i}"
                layer.append(
                    HeadParams(
                        w_node=np.asarray(arrays[f"{base}.w_node"], dtype=np.float64),
                        w_edge=np.asarray(arrays[f"{base}.w_edge"], dtype=np.float64),
                        attn=np.asarray(arrays[f"{base}.attn"], dtype=np.float64),
                        w_agg=np.asarray(arrays[f"{base}.w_agg"], dtype=np.float64),
                    )
                )
            heads.append(layer)
        return EncoderParams(heads, self.node_dim, self.edge_dim, self.d_proj, self.d_out)


def glorot(rng: np.random.Generator, fan_out: int, fan_in: int, shape=None) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape if shape is not None else (fan_out, fan_in))


def init_encoder(
    node_dim: int,
    edge_dim: int,
    layers: int = 1,
    heads: int = 3,
    d_proj: int = 32,
    d_out: int = 32,
    seed: int = 0,
) -> EncoderParams:
    """Glorot-uniform initialization for every layer and head."""
    rng = np.random.default_rng(seed)
    all_heads = []
    for k in range(layers):
        node_in = node_dim if k == 0 else heads * d_out
        layer = [
            HeadParams(
                w_node=glorot(rng, d_proj, node_in),
                w_edge=glorot(rng, d_proj, edge_dim),
                attn=glorot(rng, 1, 3 * d_proj, shape=(3 * d_proj,)),
                w_agg=glorot(rng, d_out, 2 * node_in + edge_dim),
            )
            for _ in range(heads)
        ]
        all_heads.append(layer)
    return EncoderParams(all_heads, node_dim, edge_dim, d_proj, d_out)


@dataclass
class GraphEmbedding:
    """Final node states and per-edge endpoint concatenations."""

    node_emb: np.ndarray   # (n, d_z)
    edge_emb: np.ndarray   # (m, 2 * d_z)

    @property
    def embed_dim(self) -> int:
        return int(self.node_emb.shape[1])


# -- taped forward ---------------------------------------------------------


def _head_leaves(leaves: dict, prefix: str, layer: int, head: int) -> dict:
    base = f"{prefix}.l{layer}.h{head}"
    return {name: leaves[f"{base}.{name}"] for name in ("w_node", "w_edge", "attn", "w_agg")}


def _head_attention_fields(H, E, head: dict):
    """Per-node/per-edge attention logit contributions for one head."""
    wn = tp.as_tensor(head["w_node"])
    we = tp.as_tensor(head["w_edge"])
    a = tp.as_tensor(head["attn"])
    p = wn.data.shape[0]
    ph = tp.matmul(H, tp.transpose(wn))      # (n, p)
    pe = tp.matmul(E, tp.transpose(we))      # (m, p)
    a_self = tp.slice1d(a, 0, p)
    a_edge = tp.slice1d(a, p, 2 * p)
    a_nbr = tp.slice1d(a, 2 * p, 3 * p)
    return tp.matmul(ph, a_self), tp.matmul(pe, a_edge), tp.matmul(ph, a_nbr)


def _node_incidence(graph, v: int):
    eidx = list(graph.incident[v])
    nbr = [graph.other_endpoint(e, v) for e in eidx]
    return eidx, nbr


def _node_logits(lv, le, lu, graph, v: int):
    """Raw attention logits of node v, one per incident edge."""
    eidx, nbr = _node_incidence(graph, v)
    deg = len(eidx)
    return (
        tp.take_rows(lv, [v] * deg)
        + tp.take_rows(le, eidx)
        + tp.take_rows(lu, nbr)
    )


def _node_head_state(H, E, lv, le, lu, graph, v: int, head: dict, d_out: int):
    """Attended, message-combined state of node v for one head."""
    eidx, nbr = _node_incidence(graph, v)
    if not eidx:
        return tp.leaf(np.zeros(d_out))
    logits = _node_logits(lv, le, lu, graph, v)
    alpha = tp.softmax(tp.leaky_relu(logits, LEAKY_SLOPE))
    deg = len(eidx)
    msg_in = tp.concat(
        [tp.take_rows(H, [v] * deg), tp.take_rows(E, eidx), tp.take_rows(H, nbr)],
        axis=1,
    )
    messages = tp.matmul(msg_in, tp.transpose(tp.as_tensor(head["w_agg"])))
    return tp.relu(tp.matmul(alpha, messages))


def _layer_forward(H, E, graph, leaves: dict, prefix: str, layer: int, params: EncoderParams):
    head_blocks = []
    for i in range(params.n_heads):
        head = _head_leaves(leaves, prefix, layer, i)
        lv, le, lu = _head_attention_fields(H, E, head)
        rows = [
            _node_head_state(H, E, lv, le, lu, graph, v, head, params.d_out)
            for v in range(graph.n_nodes)
        ]
        head_blocks.append(tp.stack_rows(rows))
    return tp.concat(head_blocks, axis=1)


def encode_graph_taped(graph, leaves: dict, params: EncoderParams, prefix: str = "enc"):
    """Full taped forward pass; returns (node states, edge embeddings)."""
    if graph.n_nodes == 0:
        raise ValueError("cannot encode an empty graph")
    H = tp.leaf(graph.node_features())
    E = tp.leaf(graph.edge_features)
    for k in range(params.n_layers):
        H = _layer_forward(H, E, graph, leaves, prefix, k, params)
    z_edges = tp.concat(
        [tp.take_rows(H, graph.edge_src), tp.take_rows(H, graph.edge_dst)], axis=1
    )
    return H, z_edges


def encode_graph(graph, params: EncoderParams) -> GraphEmbedding:
    """Encode a flow graph into node states and edge embeddings."""
    leaves = {k: tp.leaf(v) for k, v in params.as_dict().items()}
    nodes, edges = encode_graph_taped(graph, leaves, params)
    return GraphEmbedding(node_emb=nodes.data, edge_emb=edges.data)


# -- per-node inspection ops ------------------------------------------------


def layer_states(graph, params: EncoderParams, layer: int) -> np.ndarray:
    """Node states entering ``layer`` (all-ones features for layer 0)."""
    leaves = {k: tp.leaf(v) for k, v in params.as_dict().items()}
    H = tp.leaf(graph.node_features())
    E = tp.leaf(graph.edge_features)
    for k in range(layer):
        H = _layer_forward(H, E, graph, leaves, "enc", k, params)
    return H.data


def _states_tensor(graph, params, layer, node_states):
    if node_states is None:
        node_states = layer_states(graph, params, layer)
    return tp.leaf(np.asarray(node_states, dtype=np.float64))


def attention_logit(graph, params: EncoderParams, v: int, edge: int,
                    layer: int = 0, head: int = 0, node_states=None) -> float:
    """Raw (pre-activation) attention logit of node v toward one incident edge."""
    if edge not in graph.incident[v]:
        raise ValueError(f"edge {edge} is not incident to node {v}")
    H = _states_tensor(graph, params, layer, node_states)
    E = tp.leaf(graph.edge_features)
    head_p = params.heads[layer][head]
    hd = {"w_node": head_p.w_node, "w_edge": head_p.w_edge,
          "attn": head_p.attn, "w_agg": head_p.w_agg}
    lv, le, lu = _head_attention_fields(H, E, hd)
    logits = _node_logits(lv, le, lu, graph, v)
    slot = graph.incident[v].index(edge)
    return float(logits.data[slot])


def attention_weights(graph, params: EncoderParams, v: int,
                      layer: int = 0, head: int = 0, node_states=None) -> np.ndarray:
    """Attention distribution of node v over its incident edges.

    Entries align with ``graph.incident[v]``; an isolated node yields an
    empty array.
    """
    if not graph.incident[v]:
        return np.zeros(0)
    H = _states_tensor(graph, params, layer, node_states)
    E = tp.leaf(graph.edge_features)
    head_p = params.heads[layer][head]
    hd = {"w_node": head_p.w_node, "w_edge": head_p.w_edge,
          "attn": head_p.attn, "w_agg": head_p.w_agg}
    lv, le, lu = _head_attention_fields(H, E, hd)
    logits = _node_logits(lv, le, lu, graph, v)
    return tp.softmax(tp.leaky_relu(logits, LEAKY_SLOPE)).data


def aggregate_node(graph, params: EncoderParams, v: int,
                   layer: int = 0, node_states=None) -> np.ndarray:
    """Updated state of node v after one layer, heads concatenated."""
    H = _states_tensor(graph, params, layer, node_states)
    E = tp.leaf(graph.edge_features)
    parts = []
    for i, head_p in enumerate(params.heads[layer]):
        hd = {"w_node": head_p.w_node, "w_edge": head_p.w_edge,
              "attn": head_p.attn, "w_agg": head_p.w_agg}
        lv, le, lu = _head_attention_fields(H, E, hd)
        parts.append(_node_head_state(H, E, lv, le, lu, graph, v, hd, params.d_out).data)
    return np.concatenate(parts)
