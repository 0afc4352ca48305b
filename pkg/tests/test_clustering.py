import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_al.clustering import diversity_rank, kmeans_fit
from hybrid_al.errors import ConfigurationError, DataError

import oracles

SQUARE = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
# Frozen from oracles.best_partition_inertia(SQUARE, 2): two adjacent-corner
# pairs, each contributing 2 * 0.5**2.
SQUARE_OPTIMUM = 1.0


class TestKMeans:
    def test_exact_fit(self, rng):
        X = rng.normal(size=(5, 3))
        fit = kmeans_fit(X, 5, seed=0)
        assert fit.inertia == 0.0
        np.testing.assert_array_equal(np.sort(fit.centroids, axis=0), np.sort(X, axis=0))

    def test_square_optimum_frozen(self):
        assert oracles.best_partition_inertia(SQUARE, 2) == SQUARE_OPTIMUM

    def test_square(self):
        results = [kmeans_fit(SQUARE, 2, seed=s).inertia for s in range(40)]
        assert min(results) == pytest.approx(SQUARE_OPTIMUM)
        assert all(r >= SQUARE_OPTIMUM - 1e-12 for r in results)

    def test_duplicated_point(self):
        X = np.tile([[2.0, -1.0]], (6, 1))
        fit = kmeans_fit(X, 1, seed=0)
        assert fit.inertia == 0.0
        np.testing.assert_array_equal(fit.centroids[0], [2.0, -1.0])
        # more clusters than distinct points still terminates cleanly
        fit3 = kmeans_fit(X, 3, seed=1)
        assert fit3.inertia == 0.0
        assert not np.isnan(fit3.centroids).any()

    def test_errors(self):
        with pytest.raises(ConfigurationError):
            kmeans_fit(SQUARE, 5, seed=0)
        with pytest.raises(ConfigurationError):
            kmeans_fit(SQUARE, 0, seed=0)
        with pytest.raises(DataError):
            kmeans_fit(np.array([[0.0], [np.inf]]), 1, seed=0)

    def test_deterministic(self, rng):
        X = rng.normal(size=(60, 2))
        a, b = kmeans_fit(X, 4, seed=9), kmeans_fit(X, 4, seed=9)
        np.testing.assert_array_equal(a.centroids, b.centroids)
        np.testing.assert_array_equal(a.assignments, b.assignments)

    def test_invariants(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 40))
            K = int(rng.integers(1, min(n, 6) + 1))
            X = rng.normal(size=(n, int(rng.integers(1, 4))))
            fit = kmeans_fit(X, K, seed=int(rng.integers(1000)))
            d2 = ((X[:, None, :] - fit.centroids[None]) ** 2).sum(axis=2)
            np.testing.assert_array_equal(fit.assignments, d2.argmin(axis=1))
            assert fit.inertia == pytest.approx(float((fit.distances ** 2).sum()))
            h = np.array(fit.inertia_history)
            assert np.all(np.diff(h) <= 1e-12 * max(1.0, h[0]))

    def test_empty_cluster_repair(self):
        # Two far groups; with K=3 Lloyd would empty a cluster stuck between them.
        X = np.array([[0.0], [0.1], [0.2], [10.0], [10.1], [10.2]])
        for seed in range(20):
            fit = kmeans_fit(X, 3, seed=seed)
            assert np.bincount(fit.assignments, minlength=3).min() >= 1
            assert not np.isnan(fit.centroids).any()

    def test_matches_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 25))
            K = int(rng.integers(1, min(n, 4) + 1))
            X = rng.normal(size=(n, int(rng.integers(1, 4))))
            seed = int(rng.integers(10**6))
            C, labels, dist, hist = oracles.kmeans(X.tolist(), K, seed)
            fit = kmeans_fit(X, K, seed)
            assert fit.assignments.tolist() == labels
            np.testing.assert_allclose(fit.centroids, C, rtol=1e-12, atol=1e-12)


class TestDiversityRank:
    def test_identical_points(self):
        X = np.zeros((5, 2))
        assert diversity_rank(X, [4, 2, 9, 0, 7], K=2, seed=0).tolist() == [0, 2, 4, 7, 9]

    def test_outlier_first(self, rng):
        X = np.vstack([rng.normal(scale=0.01, size=(10, 2)), [[5.0, 5.0]]])
        ids = list(range(100, 111))
        assert diversity_rank(X, ids, K=1, seed=0)[0] == 110

    def test_matches_oracle(self, rng):
        for _ in range(20):
            m = int(rng.integers(3, 51))
            X = rng.normal(size=(m, 2))
            ids = rng.permutation(500)[:m].tolist()
            seed = int(rng.integers(10**6))
            expected = oracles.diversity_order(X.tolist(), ids, 3, seed)
            assert diversity_rank(X, ids, 3, seed).tolist() == expected

    def test_symmetric_pair_ties_by_id(self):
        # Each pair sits either side of its mean: exact ties, broken by id.
        X = np.array([[0.1, 0.0], [0.3, 0.0], [7.7, 1.3], [7.9, 1.3]])
        ids = [8, 3, 6, 1]
        for scale in (1.0, 0.37, 13.1):
            assert diversity_rank(X * scale, ids, 2, seed=0).tolist() == [1, 3, 6, 8]

    @settings(max_examples=60, deadline=None)
    @given(st.integers(3, 30), st.integers(0, 2**31 - 1),
           st.floats(0.01, 100.0))
    def test_permutation_and_scale(self, m, seed, scale):
        r = np.random.default_rng(seed)
        X = r.normal(size=(m, 2))
        ids = np.arange(m) * 3
        out = diversity_rank(X, ids, 3, seed)
        assert sorted(out.tolist()) == ids.tolist()
        assert diversity_rank(X * scale, ids, 3, seed).tolist() == out.tolist()
