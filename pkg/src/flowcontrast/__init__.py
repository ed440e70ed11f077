"""Self-supervised contrastive learning on NetFlow graphs.

The package turns NetFlow-style CSV exports into endpoint graphs whose
edges carry per-flow feature vectors, encodes them with an edge-featured
multi-head attention network, trains the encoder without labels by
contrasting sampled 1-hop subgraphs against generated counterparts under
optimal-transport distances, and evaluates the frozen edge embeddings with
clustering or a linear probe.
"""

__version__ = "0.1.0"
