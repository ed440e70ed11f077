import math

import numpy as np
import pytest

from flowcontrast.errors import ConfigError
from flowcontrast.flowdata import build_graph, synth_dataset
from flowcontrast.flowdata.ingest import FlowRecord
from flowcontrast.negat import encode_graph, init_encoder
from flowcontrast.negsc import (
    ContrastConfig,
    contrastive_loss,
    extract_subgraph,
    generate_contrastive,
    init_generator,
    sample_centers,
    train,
)
from flowcontrast.negsc.subgraphs import extract_structure
from flowcontrast.numcore import functional as F


def rec(src, dst, feats=(1.0, 0.0)):
    return FlowRecord(src_ip=src, dst_ip=dst, src_port=1, dst_port=2,
                      categorical=(), numeric=tuple(feats), label=0, attack="Benign")


def graph_of(records):
    return build_graph(records, np.array([r.numeric for r in records]))


def encoded_fixture(seed=0, nodes=30, edges=150):
    recs = synth_dataset(classes=3, nodes=nodes, edges=edges, separation=4.0,
                         feature_dim=4, seed=seed)
    graph = build_graph(recs, np.array([r.numeric for r in recs]))
    params = init_encoder(node_dim=1, edge_dim=4, layers=1, heads=2,
                          d_proj=4, d_out=4, seed=seed + 1)
    return graph, encode_graph(graph, params), params


class TestSampleCenters:
    def test_star_hub_is_only_eligible(self):
        g = graph_of([rec("C", f"L{i}") for i in range(5)])
        centers = sample_centers(g, 1, 3, seed_or_rng=0)
        assert centers == [g.node_ids.index("C")]

    def test_request_equal_to_eligible_returns_all(self):
        g = graph_of([rec("A", "B"), rec("B", "C"), rec("C", "A")])
        centers = sample_centers(g, 3, 2, seed_or_rng=1)
        assert sorted(centers) == [0, 1, 2]

    def test_deterministic_under_seed(self):
        graph, _, _ = encoded_fixture()
        assert sample_centers(graph, 5, 3, 7) == sample_centers(graph, 5, 3, 7)

    def test_shrinks_with_warning(self):
        g = graph_of([rec("C", f"L{i}") for i in range(5)])
        with pytest.warns(UserWarning, match="eligible"):
            centers = sample_centers(g, 4, 3, seed_or_rng=0)
        assert len(centers) == 1

    def test_no_eligible_is_config_error(self):
        g = graph_of([rec("A", "B")])
        with pytest.raises(ConfigError):
            sample_centers(g, 1, 3, seed_or_rng=0)


class TestExtractSubgraph:
    def test_path_graph(self):
        g = graph_of([rec("A", "B"), rec("B", "C")])
        graph, emb, _ = g, None, None
        params = init_encoder(node_dim=1, edge_dim=2, layers=1, heads=1,
                              d_proj=2, d_out=2, seed=0)
        emb = encode_graph(g, params)
        b = g.node_ids.index("B")
        sub = extract_subgraph(g, emb, b, 2, seed_or_rng=0)
        assert sorted(sub.nodes.tolist()) == [0, 1, 2]
        assert sub.nodes[0] == b
        assert sub.n_edges == 2

    def test_triangle_keeps_all_induced_edges(self):
        g = graph_of([rec("A", "B"), rec("B", "C"), rec("C", "A")])
        params = init_encoder(node_dim=1, edge_dim=2, layers=1, heads=1,
                              d_proj=2, d_out=2, seed=0)
        emb = encode_graph(g, params)
        sub = extract_subgraph(g, emb, 0, 2, seed_or_rng=0)
        assert sub.n_nodes == 3 and sub.n_edges == 3

    def test_hub_sampling_deterministic(self):
        g = graph_of([rec("C", f"L{i}") for i in range(10)])
        params = init_encoder(node_dim=1, edge_dim=2, layers=1, heads=1,
                              d_proj=2, d_out=2, seed=0)
        emb = encode_graph(g, params)
        hub = g.node_ids.index("C")
        s1 = extract_subgraph(g, emb, hub, 3, seed_or_rng=5)
        s2 = extract_subgraph(g, emb, hub, 3, seed_or_rng=5)
        np.testing.assert_array_equal(s1.nodes, s2.nodes)
        assert s1.n_nodes == 4 and s1.n_edges >= 3

    def test_every_non_center_adjacent_to_center(self):
        graph, emb, _ = encoded_fixture(seed=2)
        rng = np.random.default_rng(0)
        for center in sample_centers(graph, 5, 3, rng):
            sub = extract_subgraph(graph, emb, center, 3, rng)
            center_local = 0
            for v in range(1, sub.n_nodes):
                joined = any(
                    {int(a), int(b)} == {center_local, v} or v in (int(a), int(b)) and center_local in (int(a), int(b))
                    for a, b in sub.edges_local
                )
                assert joined

    def test_parallel_edges_collapse_to_lowest_id(self):
        g = graph_of([rec("A", "B"), rec("A", "B"), rec("B", "C")])
        params = init_encoder(node_dim=1, edge_dim=2, layers=1, heads=1,
                              d_proj=2, d_out=2, seed=0)
        emb = encode_graph(g, params)
        b = g.node_ids.index("B")
        sub = extract_subgraph(g, emb, b, 2, seed_or_rng=0)
        assert 0 in sub.edge_ids.tolist()      # first A-B flow kept
        assert 1 not in sub.edge_ids.tolist()  # duplicate dropped
        assert sub.n_edges == 2

    def test_embeddings_copied_from_graph_embedding(self):
        graph, emb, _ = encoded_fixture(seed=3)
        rng = np.random.default_rng(1)
        center = sample_centers(graph, 1, 3, rng)[0]
        sub = extract_subgraph(graph, emb, center, 3, rng)
        np.testing.assert_array_equal(sub.node_emb, emb.node_emb[sub.nodes])
        np.testing.assert_array_equal(sub.edge_emb, emb.edge_emb[sub.edge_ids])


class TestGenerate:
    def test_structure_copied_one_to_one(self):
        graph, emb, _ = encoded_fixture(seed=4)
        rng = np.random.default_rng(2)
        center = sample_centers(graph, 1, 3, rng)[0]
        sub = extract_subgraph(graph, emb, center, 3, rng)
        gen = init_generator(emb.embed_dim, d_proj=4, seed=0)
        out = generate_contrastive(sub, gen)
        assert out.kind == "generated"
        np.testing.assert_array_equal(out.nodes, sub.nodes)
        np.testing.assert_array_equal(out.edge_ids, sub.edge_ids)
        np.testing.assert_array_equal(out.edges_local, sub.edges_local)
        assert out.node_emb.shape == sub.node_emb.shape
        assert out.edge_emb.shape == sub.edge_emb.shape

    def test_generated_edges_are_endpoint_concats(self):
        graph, emb, _ = encoded_fixture(seed=5)
        rng = np.random.default_rng(3)
        center = sample_centers(graph, 1, 3, rng)[0]
        sub = extract_subgraph(graph, emb, center, 3, rng)
        gen = init_generator(emb.embed_dim, d_proj=4, seed=1)
        out = generate_contrastive(sub, gen)
        d = out.node_emb.shape[1]
        for slot, (i, j) in enumerate(out.edges_local):
            np.testing.assert_array_equal(out.edge_emb[slot, :d], out.node_emb[i])
            np.testing.assert_array_equal(out.edge_emb[slot, d:], out.node_emb[j])

    def test_zero_combination_matrix_gives_zero_embeddings(self):
        graph, emb, _ = encoded_fixture(seed=6)
        rng = np.random.default_rng(4)
        center = sample_centers(graph, 1, 3, rng)[0]
        sub = extract_subgraph(graph, emb, center, 3, rng)
        gen = init_generator(emb.embed_dim, d_proj=4, seed=2)
        gen.w_comb[:] = 0.0
        out = generate_contrastive(sub, gen)
        np.testing.assert_array_equal(out.node_emb, np.zeros_like(out.node_emb))
        np.testing.assert_array_equal(out.edge_emb, np.zeros_like(out.edge_emb))

    def test_single_neighbor_node_one_term_interpolation(self):
        g = graph_of([rec("A", "B"), rec("B", "C")])
        params = init_encoder(node_dim=1, edge_dim=2, layers=1, heads=1,
                              d_proj=2, d_out=2, seed=0)
        emb = encode_graph(g, params)
        b = g.node_ids.index("B")
        sub = extract_subgraph(g, emb, b, 2, seed_or_rng=0)
        gen = init_generator(emb.embed_dim, d_proj=3, seed=3)
        out = generate_contrastive(sub, gen)
        # local node for "A" has exactly one in-subgraph neighbor (the center),
        # so its interpolation is relu(w_comb @ concat) with attention 1
        a_local = sub.nodes.tolist().index(g.node_ids.index("A"))
        slots, nbrs = sub.local_neighbors(a_local)
        assert len(slots) == 1
        concat = np.concatenate(
            [sub.node_emb[a_local], sub.edge_emb[slots[0]], sub.node_emb[nbrs[0]]]
        )
        expected = np.maximum(gen.w_comb @ concat, 0.0)
        np.testing.assert_allclose(out.node_emb[a_local], expected, atol=1e-12)

    def test_three_node_path_hand_arithmetic(self):
        # 1-dim embeddings set by hand; center B has two neighbors
        g = graph_of([rec("A", "B"), rec("B", "C")])
        sub = extract_structure(g, g.node_ids.index("B"), 2, 0)
        node_emb = np.array([[2.0], [1.0], [3.0]])[sub.nodes]
        edge_emb = np.concatenate(
            [node_emb[np.searchsorted(sub.nodes, g.edge_src[sub.edge_ids])],
             node_emb[np.searchsorted(sub.nodes, g.edge_dst[sub.edge_ids])]],
            axis=1,
        )
        # simpler: recompute by local indices
        edge_emb = np.concatenate(
            [node_emb[sub.edges_local[:, 0]], node_emb[sub.edges_local[:, 1]]], axis=1
        )
        sub = sub.with_embeddings(node_emb, edge_emb, "sampled")
        gen = init_generator(1, d_proj=1, seed=0)
        gen.w_node[:] = [[1.0]]
        gen.w_edge[:] = [[0.5, 0.5]]
        gen.attn[:] = [1.0, 1.0, 1.0]
        gen.w_comb[:] = [[1.0, 1.0, 1.0, 1.0]]
        out = generate_contrastive(sub, gen)
        zb = node_emb[0, 0]  # center value
        # center sees both edges; logits = zb + (zedge sum)/2 + z_nbr
        logits = []
        msgs = []
        for slot, nbr in zip(*sub.local_neighbors(0)):
            ze = edge_emb[slot]
            logits.append(zb + 0.5 * ze.sum() + node_emb[nbr, 0])
            msgs.append(zb + ze.sum() + node_emb[nbr, 0])
        alpha = F.softmax(F.leaky_relu(np.array(logits), 0.2))
        expected_center = max(float(alpha @ np.array(msgs)), 0.0)
        assert out.node_emb[0, 0] == pytest.approx(expected_center, abs=1e-12)

    def test_generated_input_rejected(self):
        graph, emb, _ = encoded_fixture(seed=7)
        rng = np.random.default_rng(5)
        center = sample_centers(graph, 1, 3, rng)[0]
        sub = extract_subgraph(graph, emb, center, 3, rng)
        gen = init_generator(emb.embed_dim, d_proj=4, seed=4)
        out = generate_contrastive(sub, gen)
        with pytest.raises(ValueError):
            generate_contrastive(out, gen)


class TestContrastiveLoss:
    def pair_fixture(self, seed=0, n_pairs=3):
        graph, emb, _ = encoded_fixture(seed=seed)
        rng = np.random.default_rng(seed)
        centers = sample_centers(graph, n_pairs, 3, rng)
        gen = init_generator(emb.embed_dim, d_proj=4, seed=seed)
        pairs = []
        for c in centers:
            sub = extract_subgraph(graph, emb, c, 3, rng)
            pairs.append((sub, generate_contrastive(sub, gen)))
        return pairs

    def test_single_pair_zero_distance_zero_loss(self):
        pairs = self.pair_fixture(n_pairs=1)
        sub = pairs[0][0]
        identical = sub.with_embeddings(sub.node_emb.copy(), sub.edge_emb.copy(), "generated")
        total, breakdown = contrastive_loss([(sub, identical)], [[]], temperature=0.2,
                                            epsilon=0.005, gwd_outer=10)
        # WD(S,S) and GWD(S,S) carry only the entropic bias
        assert abs(total) < 0.2
        assert breakdown.positive_wd[0] < 0.02
        assert breakdown.positive_gwd[0] < 0.05

    def test_closed_form_at_tau_ln2(self):
        # distances d = tau*ln 2 for both branches, one pair, no negatives:
        # each branch contributes exactly ln 2
        from flowcontrast.negsc.loss import assemble_loss_t
        from flowcontrast.numcore import tape as tp

        tau = 0.2
        d = tp.leaf(np.asarray(tau * math.log(2.0)))
        total, edges, topology = assemble_loss_t([d], [d], [[]], [[]], tau)
        assert edges.item() == pytest.approx(math.log(2.0), abs=1e-12)
        assert topology.item() == pytest.approx(math.log(2.0), abs=1e-12)
        assert total.item() == pytest.approx(2.0 * math.log(2.0), abs=1e-9)

    def test_zero_distance_negative_is_clamped_finite(self):
        from flowcontrast.negsc.loss import LOG_FLOOR, assemble_loss_t
        from flowcontrast.numcore import tape as tp

        zero = tp.leaf(np.asarray(0.0))
        total, edges, _ = assemble_loss_t([zero, zero], [zero, zero],
                                          [[zero], [zero]], [[zero], [zero]], 0.2)
        assert math.isfinite(total.item())
        expected_edges = (0.0 - math.log(LOG_FLOOR) + 0.0 - math.log(LOG_FLOOR)) / (2 * 2)
        assert edges.item() == pytest.approx(expected_edges, abs=1e-12)

    def test_invariant_under_pair_reordering(self):
        pairs = self.pair_fixture(seed=1, n_pairs=3)
        negatives = [[1], [2], [0]]
        total, _ = contrastive_loss(pairs, negatives, temperature=0.2)
        perm = [2, 0, 1]
        pairs2 = [pairs[p] for p in perm]
        # remap negative indices through the permutation
        inv = {old: new for new, old in enumerate(perm)}
        negatives2 = [[inv[j] for j in negatives[old]] for old in perm]
        total2, _ = contrastive_loss(pairs2, negatives2, temperature=0.2)
        assert total == pytest.approx(total2, abs=1e-12)

    def test_self_negative_rejected(self):
        pairs = self.pair_fixture(seed=2, n_pairs=2)
        with pytest.raises(ValueError):
            contrastive_loss(pairs, [[0], [0]], temperature=0.2)


class TestTrainLossMatchesPublicOp:
    def test_batch_loss_equals_contrastive_loss_on_materialized_pairs(self):
        graph, emb, enc = encoded_fixture(seed=9)
        gen = init_generator(emb.embed_dim, d_proj=4, seed=10)
        cfg = ContrastConfig(centers=4, neighbors=3, negatives=2, temperature=0.3,
                             epsilon=0.05, sinkhorn_iters=150, sinkhorn_tol=1e-8,
                             gwd_outer=4, learning_rate=0.0, epochs=1, seed=5)
        from flowcontrast.negsc.train import batch_loss_t
        from flowcontrast.numcore import tape as tp

        leaves = {k: tp.leaf(v) for k, v in {**enc.as_dict(), **gen.as_dict()}.items()}
        total, _, _, frozen = batch_loss_t(
            graph, leaves, enc, cfg, rng=np.random.default_rng(cfg.seed)
        )
        pairs = []
        for sub in frozen.subgraphs:
            filled = sub.with_embeddings(
                emb.node_emb[sub.nodes], emb.edge_emb[sub.edge_ids], "sampled"
            )
            pairs.append((filled, generate_contrastive(filled, gen)))
        value, _ = contrastive_loss(
            pairs, frozen.negatives, temperature=cfg.temperature,
            epsilon=cfg.epsilon, sinkhorn_iters=cfg.sinkhorn_iters,
            sinkhorn_tol=cfg.sinkhorn_tol, gwd_outer=cfg.gwd_outer,
        )
        assert total.item() == pytest.approx(value, abs=1e-9)


class TestGeneratorGradients:
    def test_probe_gradient_through_generator(self):
        graph, emb, enc = encoded_fixture(seed=8)
        rng = np.random.default_rng(6)
        centers = sample_centers(graph, 2, 3, rng)
        subs = [extract_subgraph(graph, emb, c, 3, rng) for c in centers]
        gen = init_generator(emb.embed_dim, d_proj=3, seed=9)
        probes = [np.random.default_rng(i).normal(size=s.node_emb.shape) for i, s in enumerate(subs)]

        from flowcontrast.negsc.generator import generate_taped
        from flowcontrast.numcore import grad_check
        from flowcontrast.numcore import tape as tp

        def vag(params):
            leaves = {k: tp.leaf(v) for k, v in params.items()}
            total = None
            for i, sub in enumerate(subs):
                nodes_t, _ = generate_taped(
                    sub, tp.leaf(sub.node_emb), tp.leaf(sub.edge_emb), leaves
                )
                term = tp.tsum(tp.mul(tp.leaf(probes[i]), nodes_t))
                total = term if total is None else total + term
            total.backward()
            return total.item(), {k: leaves[k].grad for k in params}

        report = grad_check(vag, gen.as_dict(), perturbation=1e-5)
        assert report.max_rel_error < 1e-4, report.summary()


class TestTrain:
    def train_fixture(self, seed=0):
        recs = synth_dataset(classes=3, nodes=24, edges=160, separation=6.0,
                             feature_dim=4, seed=seed)
        graph = build_graph(recs, np.array([r.numeric for r in recs]))
        encoder = init_encoder(node_dim=1, edge_dim=4, layers=1, heads=2,
                               d_proj=4, d_out=4, seed=seed)
        generator = init_generator(2 * 4, d_proj=4, seed=seed + 1)
        return graph, encoder, generator

    def config(self, **kw):
        base = dict(centers=6, neighbors=3, negatives=2, temperature=0.2,
                    epsilon=0.05, sinkhorn_iters=100, sinkhorn_tol=1e-6,
                    gwd_outer=4, learning_rate=5e-3, epochs=3, seed=0)
        base.update(kw)
        return ContrastConfig(**base)

    def test_zero_learning_rate_keeps_params(self):
        graph, encoder, generator = self.train_fixture()
        before = {k: v.copy() for k, v in {**encoder.as_dict(), **generator.as_dict()}.items()}
        result = train(graph, encoder, generator, self.config(learning_rate=0.0, epochs=2))
        after = {**result.encoder.as_dict(), **result.generator.as_dict()}
        for k in before:
            np.testing.assert_array_equal(before[k], after[k])

    def test_fixed_seed_reproduces_trace(self):
        graph, encoder, generator = self.train_fixture(seed=1)
        r1 = train(graph, encoder, generator, self.config(seed=3))
        r2 = train(graph, encoder, generator, self.config(seed=3))
        assert [e.loss for e in r1.trace] == [e.loss for e in r2.trace]
        assert [e.loss_edges for e in r1.trace] == [e.loss_edges for e in r2.trace]

    def test_loss_decreases_on_planted_classes(self):
        graph, encoder, generator = self.train_fixture(seed=2)
        result = train(graph, encoder, generator, self.config(epochs=5, learning_rate=5e-3, seed=0))
        losses = [e.loss for e in result.trace]
        increases = sum(1 for a, b in zip(losses, losses[1:]) if b >= a)
        assert increases <= 1, losses

    def test_zero_epochs_returns_initialization(self):
        graph, encoder, generator = self.train_fixture(seed=3)
        result = train(graph, encoder, generator, self.config(epochs=0))
        assert result.trace == []
        for k, v in encoder.as_dict().items():
            np.testing.assert_array_equal(v, result.encoder.as_dict()[k])

    def test_invalid_config_rejected(self):
        with pytest.raises(ConfigError):
            self.config(negatives=9, centers=4)
        with pytest.raises(ConfigError):
            self.config(temperature=0.0)
        with pytest.raises(ConfigError):
            self.config(epsilon=-1.0)
