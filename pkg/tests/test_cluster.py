import numpy as np
import pytest

from cluster import _fill_empty_clusters, inertia, kmeans
from config import INERTIA_SLACK
from errors import DimensionMismatch, TooFewPoints, ValidationError
from estimate import burg_burst
from helpers import random_disk, random_point
from poincare import ProductPoint, karcher_mean, product_distance
from simulate import ClassSpec, ScenarioConfig, simulate_scenario


def blob(rng, center, size, spread=0.05):
    return [ProductPoint(center.log_p0 + rng.normal(0, spread), center.mu + random_disk(rng, center.order, spread),
                         center.n_pulses) for _ in range(size)]


def two_blobs(rng, size=20):
    a = ProductPoint(0.0, [0.1, 0.0], 3)
    b = ProductPoint(1.0, [-0.8, 0.5j], 3)
    return blob(rng, a, size) + blob(rng, b, size), np.repeat([0, 1], size)


class TestInertia:
    def test_examples(self):
        x = ProductPoint(0.0, [0.0], 4)
        y = ProductPoint(0.0, [0.5], 4)
        assert inertia([x], [0], [x]) == 0.0
        assert inertia([x, y], [0, 0], [x]) == pytest.approx(product_distance(x, y) ** 2)

    def test_permutation_invariance(self, rng):
        points = [random_point(rng, 4) for _ in range(12)]
        centroids = [random_point(rng, 4) for _ in range(3)]
        labels = rng.integers(0, 3, size=12)
        perm = np.array([2, 0, 1])
        relabelled = [None] * 3
        for old, new in enumerate(perm):
            relabelled[new] = centroids[old]
        assert inertia(points, perm[labels], relabelled) == pytest.approx(inertia(points, labels, centroids))

    def test_bad_labels(self, rng):
        points = [random_point(rng, 4) for _ in range(3)]
        with pytest.raises(DimensionMismatch):
            inertia(points, [0, 0], points[:1])
        with pytest.raises(DimensionMismatch):
            inertia(points, [0, 1, 2], points[:2])


class TestKMeans:
    def test_single_cluster_is_karcher_mean(self, rng):
        points = [random_point(rng, 4) for _ in range(15)]
        model = kmeans(points, 1, seed=3)
        assert model.labels.tolist() == [0] * 15
        assert product_distance(model.centroids[0], karcher_mean(points)) < 1e-7

    def test_two_locations(self):
        a, b = ProductPoint(0.0, [0.2], 2), ProductPoint(2.0, [-0.6j], 2)
        points = [a, b, a, b, a, b, a]
        model = kmeans(points, 2, seed=1)
        assert model.inertia == pytest.approx(0.0, abs=1e-12)
        assert len(set(model.labels[[0, 2, 4, 6]])) == 1
        assert len(set(model.labels[[1, 3, 5]])) == 1
        assert model.labels[0] != model.labels[1]

    def test_recovers_blobs(self, rng):
        points, truth = two_blobs(rng)
        model = kmeans(points, 2, seed=7, restarts=3)
        assert model.converged
        agree = np.mean(model.labels == truth)
        assert max(agree, 1 - agree) == 1.0

    def test_inertia_trace_is_monotone(self, rng):
        points = [random_point(rng, 6) for _ in range(60)]
        for init in ('random', 'pp'):
            trace = kmeans(points, 4, seed=11, init=init).inertia_trace
            assert all(b <= a * (1 + INERTIA_SLACK) for a, b in zip(trace, trace[1:]))

    def test_final_inertia_matches_labels(self, rng):
        points, _ = two_blobs(rng)
        model = kmeans(points, 3, seed=2)
        assert model.inertia == pytest.approx(inertia(points, model.labels, model.centroids), rel=1e-12)
        assert sorted(set(model.labels.tolist())) == [0, 1, 2]

    def test_deterministic(self, rng):
        points = [random_point(rng, 4) for _ in range(30)]
        a = kmeans(points, 3, seed=5, restarts=2)
        b = kmeans(points, 3, seed=5, restarts=2)
        assert np.array_equal(a.labels, b.labels)
        assert a.inertia_trace == b.inertia_trace
        assert a.seed == b.seed

    def test_restarts_never_worse(self, rng):
        points = [random_point(rng, 4) for _ in range(40)]
        single = kmeans(points, 4, seed=9, restarts=1)
        several = kmeans(points, 4, seed=9, restarts=4)
        assert several.inertia <= single.inertia

    def test_labels_read_only(self, rng):
        model = kmeans([random_point(rng, 4) for _ in range(5)], 2)
        with pytest.raises(ValueError):
            model.labels[0] = 1

    def test_to_dict(self, rng):
        model = kmeans([random_point(rng, 4) for _ in range(6)], 2, seed=4)
        data = model.to_dict()
        assert data['k'] == 2 and len(data['labels']) == 6
        assert set(data['centroids'][0]) == {'log_p0', 'mu', 'n_pulses'}

    def test_too_few_points(self, rng):
        p = random_point(rng, 4)
        with pytest.raises(TooFewPoints):
            kmeans([p, p, p], 2)
        with pytest.raises(TooFewPoints):
            kmeans([], 1)

    def test_invalid_arguments(self, rng):
        points = [random_point(rng, 4) for _ in range(5)]
        with pytest.raises(ValidationError):
            kmeans(points, 0)
        with pytest.raises(ValidationError):
            kmeans(points, 2, init='forgy')
        with pytest.raises(ValidationError):
            kmeans(points, 2, restarts=0)

    def test_simulated_classes_centroids_converge(self):
        scenario = ScenarioConfig(seed=20240611, n_pulses=16, classes=(
            ClassSpec('A', 1.0, (0.1,), 100, texture_shape=1.0),
            ClassSpec('B', 1.0, (0.9,), 100, texture_shape=1.0),
        ))
        burst, _ = simulate_scenario(scenario)
        points = [ProductPoint.from_reflection(p, 16) for p in burg_burst(burst, 15)]
        model = kmeans(points, 2, seed=3, restarts=1)
        assert [d for d in model.diagnostics if d['event'] == 'no_convergence'] == []


class TestEmptyClusters:
    def test_farthest_point_moves(self):
        labels = np.array([0, 0, 0, 1])
        distances = np.array([[0.1, 5.0, 9.0], [0.7, 5.0, 9.0], [0.3, 5.0, 9.0], [4.0, 0.2, 9.0]])
        diagnostics = []
        filled = _fill_empty_clusters(labels, distances, 3, diagnostics)
        assert filled.tolist() == [0, 2, 0, 1]
        assert diagnostics == [{'event': 'empty_cluster', 'cluster': 2, 'point': 1}]

    def test_singletons_are_not_donors(self):
        labels = np.array([0, 1, 1])
        distances = np.array([[9.0, 1.0, 1.0], [1.0, 0.1, 1.0], [1.0, 0.2, 1.0]])
        filled = _fill_empty_clusters(labels, distances, 3, [])
        assert filled.tolist() == [0, 1, 2]

    def test_no_empty_cluster_is_untouched(self):
        labels = np.array([0, 1])
        diagnostics = []
        filled = _fill_empty_clusters(labels, np.zeros((2, 2)), 2, diagnostics)
        assert filled.tolist() == [0, 1] and diagnostics == []
