import numpy as np
import pytest
from sklearn.metrics import davies_bouldin_score

from commroles import (ClusteringConfig, ClusterResult, DataError,
                       davies_bouldin, kmeans, select_k, sweep_k)
from commroles.clustering import _pick_best

import reference


def _blobs(rng, centers, per=50, sigma=0.1):
    centers = np.asarray(centers, dtype=np.float64)
    pts = np.concatenate([c + sigma * rng.normal(size=(per, centers.shape[1]))
                          for c in centers])
    truth = np.repeat(np.arange(len(centers)), per)
    return pts, truth


def _separated_centers(k: int, dims: int = 8, gap: float = 10.0) -> np.ndarray:
    centers = np.zeros((k, dims))
    for i in range(k):
        centers[i, i] = gap  # pairwise distance gap*sqrt(2) >= gap
    return centers


class TestKmeans:
    def test_two_clear_clusters_1d(self):
        pts = np.array([0.0, 1.0, 10.0, 11.0])
        res = kmeans(pts, 2, ClusteringConfig(seed=1))
        assert res.assignment[0] == res.assignment[1]
        assert res.assignment[2] == res.assignment[3]
        assert res.assignment[0] != res.assignment[2]
        assert sorted(res.centroids[:, 0].tolist()) == [0.5, 10.5]
        assert res.inertia == pytest.approx(1.0, abs=1e-12)

    def test_k1_is_mean(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(30, 4))
        res = kmeans(pts, 1, ClusteringConfig(seed=0))
        assert res.centroids[0] == pytest.approx(pts.mean(axis=0), abs=1e-12)
        assert res.inertia == pytest.approx(((pts - pts.mean(0)) ** 2).sum(), abs=1e-9)
        assert res.db_index is None

    def test_k_equals_n_zero_inertia(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(6, 3))
        res = kmeans(pts, 6, ClusteringConfig(seed=2))
        assert res.inertia == pytest.approx(0.0, abs=1e-18)
        assert len(set(res.assignment.tolist())) == 6

    def test_k_exceeding_distinct_points_errors(self):
        pts = np.array([[1.0, 2.0]] * 5 + [[3.0, 4.0]] * 5)
        with pytest.raises(DataError):
            kmeans(pts, 3, ClusteringConfig(seed=0))

    def test_inertia_history_non_increasing(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(300, 8))
        for k in (2, 5, 9):
            res = kmeans(pts, k, ClusteringConfig(seed=3))
            hist = res.inertia_history
            for a, b in zip(hist, hist[1:]):
                assert b <= a + 1e-9 * max(a, 1.0)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(120, 8))
        a = kmeans(pts, 4, ClusteringConfig(seed=11))
        b = kmeans(pts, 4, ClusteringConfig(seed=11))
        assert np.array_equal(a.assignment, b.assignment)
        assert a.inertia == b.inertia

    def test_no_empty_clusters(self):
        rng = np.random.default_rng(13)
        # adversarial: heavy duplicate mass plus a few outliers
        pts = np.concatenate([np.zeros((50, 2)),
                              np.ones((3, 2)) * 100,
                              rng.normal(size=(5, 2))])
        for k in (2, 4, 7):
            res = kmeans(pts, k, ClusteringConfig(seed=1))
            assert np.bincount(res.assignment, minlength=k).min() > 0


class TestDaviesBouldin:
    def test_zero_scatter_two_clusters(self):
        pts = np.array([[0.0, 0.0], [0.0, 0.0], [10.0, 10.0], [10.0, 10.0]])
        assert davies_bouldin(pts, np.array([0, 0, 1, 1])) == 0.0

    def test_hand_value(self):
        pts = np.array([0.0, 2.0, 10.0, 12.0])
        assert davies_bouldin(pts, np.array([0, 0, 1, 1])) == pytest.approx(0.2, abs=1e-12)

    def test_three_zero_scatter_clusters(self):
        pts = np.repeat(np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 8.66]]), 3, axis=0)
        labels = np.repeat(np.arange(3), 3)
        assert davies_bouldin(pts, labels) == 0.0

    def test_coincident_centroids_error(self):
        pts = np.array([[0.0], [2.0], [0.0], [2.0]])
        with pytest.raises(DataError):
            davies_bouldin(pts, np.array([0, 0, 1, 1]))

    def test_single_cluster_error(self):
        with pytest.raises(DataError):
            davies_bouldin(np.array([[0.0], [1.0]]), np.array([0, 0]))

    def test_relabeling_and_translation_invariance(self):
        rng = np.random.default_rng(3)
        pts, truth = _blobs(rng, _separated_centers(3), per=20)
        base = davies_bouldin(pts, truth)
        perm = np.array([2, 0, 1])
        assert davies_bouldin(pts, perm[truth]) == pytest.approx(base, abs=1e-12)
        shift = rng.normal(size=pts.shape[1]) * 50
        assert davies_bouldin(pts + shift, truth) == pytest.approx(base, abs=1e-9)

    def test_matches_sklearn_and_bruteforce(self):
        rng = np.random.default_rng(9)
        for trial in range(5):
            pts = rng.normal(size=(60, 4))
            labels = rng.integers(0, 4, size=60)
            labels[:4] = np.arange(4)  # keep all clusters non-empty
            ours = davies_bouldin(pts, labels)
            assert ours == pytest.approx(davies_bouldin_score(pts, labels), abs=1e-9)
            assert ours == pytest.approx(
                reference.db_index(pts.tolist(), labels.tolist()), abs=1e-9)


class TestSelectK:
    def test_four_blobs(self):
        rng = np.random.default_rng(21)
        pts, _ = _blobs(rng, _separated_centers(4))
        k, res = select_k(pts, ClusteringConfig(k_min=2, k_max=15, seed=5))
        assert k == 4
        assert res.db_index < 0.1

    def test_two_blobs(self):
        rng = np.random.default_rng(22)
        pts, _ = _blobs(rng, _separated_centers(2))
        k, _ = select_k(pts, ClusteringConfig(k_min=2, k_max=8, seed=6))
        assert k == 2

    def test_identical_points_rejected(self):
        pts = np.tile([[1.0, 2.0]], (30, 1))
        with pytest.raises(DataError):
            select_k(pts, ClusteringConfig(k_min=2, k_max=4, seed=0))

    def test_ties_break_to_smaller_k(self):
        mk = lambda db: ClusterResult(assignment=np.zeros(1, dtype=int),
                                      centroids=np.zeros((1, 1)),
                                      inertia=0.0, db_index=db)
        k, _ = _pick_best([(2, mk(0.5)), (3, mk(0.5)), (4, mk(0.7))])
        assert k == 2

    def test_sweep_results_independent_of_threads(self):
        rng = np.random.default_rng(30)
        pts, _ = _blobs(rng, _separated_centers(3), per=30)
        cfg = ClusteringConfig(k_min=2, k_max=6, seed=9, restarts=3)
        serial = sweep_k(pts, cfg, threads=1)
        parallel = sweep_k(pts, cfg, threads=4)
        for (k1, r1), (k2, r2) in zip(serial, parallel):
            assert k1 == k2
            assert np.array_equal(r1.assignment, r2.assignment)
            assert r1.inertia == r2.inertia
            assert r1.db_index == r2.db_index

    def test_never_returns_empty_cluster(self):
        rng = np.random.default_rng(33)
        pts = np.concatenate([np.zeros((40, 3)), rng.normal(size=(10, 3))])
        _, res = select_k(pts, ClusteringConfig(k_min=2, k_max=6, seed=2))
        assert np.bincount(res.assignment).min() > 0


def test_config_validation():
    with pytest.raises(ValueError):
        ClusteringConfig(k_min=1)
    with pytest.raises(ValueError):
        ClusteringConfig(k_min=5, k_max=3)
    with pytest.raises(ValueError):
        ClusteringConfig(tolerance=-1.0)
