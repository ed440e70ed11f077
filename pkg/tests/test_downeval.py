import numpy as np
import pytest

from flowcontrast.downeval import (
    compute_metrics,
    kmeans_embed,
    linear_probe,
    map_clusters,
    roc_points,
)
from flowcontrast.errors import DegenerateDataError


class TestKMeans:
    def test_two_far_clouds_recovered(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(40, 3)) + np.array([0.0, 0.0, 0.0])
        b = rng.normal(size=(40, 3)) + np.array([30.0, 0.0, 0.0])  # 10+ sigma apart
        pts = np.concatenate([a, b])
        result = kmeans_embed(pts, 2, seed=1)
        first, second = result.assignments[:40], result.assignments[40:]
        assert len(set(first.tolist())) == 1
        assert len(set(second.tolist())) == 1
        assert first[0] != second[0]

    def test_single_cluster_centroid_is_mean(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(25, 4))
        result = kmeans_embed(pts, 1, seed=0)
        np.testing.assert_allclose(result.centroids[0], pts.mean(axis=0), atol=1e-12)

    def test_duplicate_points_get_identical_assignments(self):
        rng = np.random.default_rng(2)
        base = rng.normal(size=(20, 3))
        pts = np.concatenate([base, base[:5]])
        result = kmeans_embed(pts, 3, seed=3)
        np.testing.assert_array_equal(result.assignments[20:], result.assignments[:5])

    def test_inertia_non_increasing(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(60, 5))
        result = kmeans_embed(pts, 4, seed=4)
        trace = result.inertia_trace
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(50, 3))
        r1 = kmeans_embed(pts, 3, seed=9)
        r2 = kmeans_embed(pts, 3, seed=9)
        np.testing.assert_array_equal(r1.assignments, r2.assignments)

    def test_too_many_clusters_rejected(self):
        with pytest.raises(ValueError):
            kmeans_embed(np.zeros((3, 2)), 4, seed=0)


class TestMapClusters:
    def test_relabeled_assignment_is_perfect(self):
        labels = np.array(["a", "b", "c"] * 10)
        assignments = np.array([2, 0, 1] * 10)  # a->2, b->0, c->1
        mapping, acc = map_clusters(assignments, labels)
        assert acc == 1.0
        assert mapping[2] == "a" and mapping[0] == "b" and mapping[1] == "c"

    def test_random_assignments_near_chance(self):
        rng = np.random.default_rng(5)
        n, c = 1000, 4
        labels = np.repeat(np.arange(c), n // c)
        assignments = rng.integers(0, c, size=n)
        _, acc = map_clusters(assignments, labels)
        assert abs(acc - 1.0 / c) < 0.05

    def test_single_cluster_balanced_binary_is_half(self):
        labels = np.array([0] * 50 + [1] * 50)
        assignments = np.zeros(100, dtype=int)
        _, acc = map_clusters(assignments, labels)
        assert acc == 0.5

    def test_invariant_under_cluster_id_permutation(self):
        rng = np.random.default_rng(6)
        labels = rng.integers(0, 3, size=200)
        assignments = rng.integers(0, 3, size=200)
        _, acc = map_clusters(assignments, labels)
        perm = {0: 7, 1: 5, 2: 9}
        _, acc2 = map_clusters(np.array([perm[a] for a in assignments]), labels)
        assert acc == acc2

    def test_surplus_clusters_map_by_majority(self):
        labels = np.array([0] * 6 + [1] * 6)
        assignments = np.array([0] * 3 + [1] * 3 + [2] * 3 + [3] * 3)
        mapping, acc = map_clusters(assignments, labels)
        assert set(mapping) == {0, 1, 2, 3}
        assert acc == 1.0


class TestLinearProbe:
    def test_separable_data_high_accuracy(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(60, 4)) + np.array([4.0, 0, 0, 0])
        b = rng.normal(size=(60, 4)) - np.array([4.0, 0, 0, 0])
        x = np.concatenate([a, b])
        y = np.array([1] * 60 + [0] * 60)
        probe = linear_probe(x, y, epochs=200, lr=0.05)
        acc = float(np.mean(probe.predict(x) == y))
        assert acc >= 0.99

    def test_zero_epochs_is_initialization(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(20, 3))
        y = np.array([0, 1] * 10)
        probe = linear_probe(x, y, epochs=0)
        np.testing.assert_array_equal(probe.weights, np.zeros_like(probe.weights))
        scores = probe.scores(x)
        np.testing.assert_allclose(scores, 0.5)

    def test_independent_labels_near_majority_rate(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(600, 5))
        y = rng.integers(0, 2, size=600)  # independent of x
        probe = linear_probe(x, y, epochs=100, lr=0.05)
        acc = float(np.mean(probe.predict(x) == y))
        majority = max(np.mean(y == 0), np.mean(y == 1))
        assert acc <= majority + 0.1

    def test_multiclass_path(self):
        rng = np.random.default_rng(10)
        centers = np.array([[6, 0], [0, 6], [-6, -6]], dtype=float)
        x = np.concatenate([rng.normal(size=(40, 2)) + c for c in centers])
        y = np.repeat(np.arange(3), 40)
        probe = linear_probe(x, y, epochs=300, lr=0.1)
        assert float(np.mean(probe.predict(x) == y)) >= 0.95
        np.testing.assert_allclose(probe.scores(x).sum(axis=1), 1.0, atol=1e-9)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateDataError):
            linear_probe(np.zeros((5, 2)), np.zeros(5))


class TestComputeMetrics:
    def test_all_correct_is_all_hundred(self):
        y = np.array([0, 1, 1, 0, 2])
        report = compute_metrics(y, y)
        assert report.accuracy == 100.0
        for c in report.classes:
            assert report.per_class[c]["precision"] == 100.0
            assert report.per_class[c]["recall"] == 100.0
            assert report.per_class[c]["f1"] == 100.0

    def test_hand_computed_binary_counts(self):
        # TP=50 FP=10 FN=10 TN=30: Acc 80.00, P=R=F1=83.33
        y_true = np.array([1] * 50 + [0] * 10 + [1] * 10 + [0] * 30)
        y_pred = np.array([1] * 50 + [1] * 10 + [0] * 10 + [0] * 30)
        report = compute_metrics(y_true, y_pred, positive=1)
        assert report.binary_counts == {"tp": 50, "fp": 10, "fn": 10, "tn": 30}
        assert report.accuracy == pytest.approx(80.00, abs=1e-9)
        assert report.per_class[1]["precision"] == pytest.approx(83.33, abs=0.005)
        assert report.per_class[1]["recall"] == pytest.approx(83.33, abs=0.005)
        assert report.per_class[1]["f1"] == pytest.approx(83.33, abs=0.005)

    def test_no_predicted_positives_flagged_zero(self):
        y_true = np.array([1, 1, 0, 0])
        y_pred = np.array([0, 0, 0, 0])
        report = compute_metrics(y_true, y_pred, positive=1)
        assert report.per_class[1]["precision"] == 0.0
        assert report.per_class[1]["recall"] == 0.0
        assert any("precision" in f for f in report.flags)

    def test_binary_identities(self):
        rng = np.random.default_rng(11)
        y_true = rng.integers(0, 2, size=200)
        y_pred = rng.integers(0, 2, size=200)
        report = compute_metrics(y_true, y_pred, positive=1)
        counts = report.binary_counts
        acc = 100.0 * (counts["tp"] + counts["tn"]) / 200
        assert report.accuracy == pytest.approx(acc, abs=1e-12)
        p = report.per_class[1]["precision"]
        r = report.per_class[1]["recall"]
        if p + r > 0:
            assert report.per_class[1]["f1"] == pytest.approx(2 * p * r / (p + r), abs=1e-9)

    def test_weighted_average_recomputes_exactly(self):
        rng = np.random.default_rng(12)
        y_true = rng.integers(0, 4, size=300)
        y_pred = rng.integers(0, 4, size=300)
        report = compute_metrics(y_true, y_pred)
        supports = np.array([report.per_class[c]["support"] for c in report.classes])
        for key in ("precision", "recall", "f1"):
            vals = np.array([report.per_class[c][key] for c in report.classes])
            expected = float((vals * supports).sum() / supports.sum())
            assert report.weighted[key] == pytest.approx(expected, abs=1e-9)

    def test_confusion_row_sums_are_supports(self):
        rng = np.random.default_rng(13)
        y_true = rng.integers(0, 3, size=120)
        y_pred = rng.integers(0, 3, size=120)
        report = compute_metrics(y_true, y_pred)
        for i, c in enumerate(report.classes):
            assert report.confusion.row_sums()[i] == report.per_class[c]["support"]
        assert report.confusion.counts.sum() == 120

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            compute_metrics([], [])


class TestRoc:
    def test_perfect_separation_auc_one(self):
        y = np.array([0] * 10 + [1] * 10)
        scores = np.stack([1.0 - np.linspace(0, 1, 20), np.linspace(0, 1, 20)], axis=1)
        report = roc_points(scores, y)
        assert report.per_class[1].auc == pytest.approx(1.0)
        assert report.micro.auc == pytest.approx(1.0)

    def test_random_scores_near_half(self):
        rng = np.random.default_rng(17)
        y = rng.integers(0, 2, size=1000)
        scores = rng.normal(size=(1000, 2))
        report = roc_points(scores, y)
        assert abs(report.per_class[1].auc - 0.5) < 0.05
        assert abs(report.micro.auc - 0.5) < 0.05

    def test_reversed_scores_flip_auc(self):
        rng = np.random.default_rng(15)
        y = rng.integers(0, 2, size=300)
        s = rng.normal(size=300) + y  # informative
        scores = np.stack([-s, s], axis=1)
        report = roc_points(scores, y)
        flipped = roc_points(-scores, y)
        assert flipped.per_class[1].auc == pytest.approx(1.0 - report.per_class[1].auc, abs=1e-9)

    def test_single_class_column_absent(self):
        y = np.array([0, 0, 1, 1])
        scores = np.random.default_rng(16).normal(size=(4, 3))
        report = roc_points(scores, y, classes=[0, 1, 2])
        assert report.per_class[2] is None
        assert report.per_class[0] is not None

    def test_curve_endpoints(self):
        rng = np.random.default_rng(17)
        y = rng.integers(0, 2, size=50)
        scores = np.stack([-rng.normal(size=50), rng.normal(size=50)], axis=1)
        report = roc_points(scores, y)
        curve = report.micro
        assert curve.fpr[0] == 0.0 and curve.tpr[0] == 0.0
        assert curve.fpr[-1] == 1.0 and curve.tpr[-1] == 1.0
