#!/usr/bin/env python3
"""
Metric k-means of range cells in R x D^m

Assignment uses product_distance, centroid updates use the Karcher mean of the
members. Initialization picks k distinct data points at random (or k-means++
seeding with mode 'pp'); restarts run with seeds derived from the base seed
and the lowest-inertia model is kept.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

try:
    from .config import (KARCHER_MAX_ITER, KARCHER_TOL, KMEANS_INIT_MODES, KMEANS_MAX_ITER,
                         KMEANS_RESTARTS, KMEANS_TOL, MESSAGES)
    from .errors import DimensionMismatch, NoConvergence, TooFewPoints, ValidationError
    from .poincare import ProductPoint, distances_to, karcher_mean, stack_points
except ImportError:
    from config import (KARCHER_MAX_ITER, KARCHER_TOL, KMEANS_INIT_MODES, KMEANS_MAX_ITER,
                        KMEANS_RESTARTS, KMEANS_TOL, MESSAGES)
    from errors import DimensionMismatch, NoConvergence, TooFewPoints, ValidationError
    from poincare import ProductPoint, distances_to, karcher_mean, stack_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Result of one k-means run"""

    k: int
    centroids: List[ProductPoint]
    labels: np.ndarray
    inertia: float
    n_iter: int
    converged: bool
    inertia_trace: List[float] = field(default_factory=list)
    diagnostics: List[dict] = field(default_factory=list)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            'k': self.k,
            'centroids': [c.to_dict() for c in self.centroids],
            'labels': [int(label) for label in self.labels],
            'inertia': self.inertia,
            'n_iter': self.n_iter,
            'converged': self.converged,
            'inertia_trace': list(self.inertia_trace),
            'diagnostics': list(self.diagnostics),
            'seed': self.seed,
        }


def _distance_matrix(points: Sequence[ProductPoint], centroids: Sequence[ProductPoint]) -> np.ndarray:
    return np.column_stack([distances_to(points, c) for c in centroids])


def inertia(points: Sequence[ProductPoint], labels, centroids: Sequence[ProductPoint]) -> float:
    """sum_i product_distance(p_i, centroid[label_i])^2."""
    labels = np.asarray(labels, dtype=int)
    if labels.size != len(points):
        raise DimensionMismatch(f"{labels.size} labels for {len(points)} points")
    if labels.size and (labels.min() < 0 or labels.max() >= len(centroids)):
        raise DimensionMismatch(f"labels must lie in [0, {len(centroids)})")
    total = 0.0
    for j, centroid in enumerate(centroids):
        members = [points[i] for i in np.flatnonzero(labels == j)]
        if members:
            total += float(np.sum(distances_to(members, centroid) ** 2))
    return total


def _distinct_indices(points: Sequence[ProductPoint]) -> np.ndarray:
    log_p0, mu, _ = stack_points(points)
    coords = np.column_stack([log_p0, mu.real, mu.imag])
    _, first = np.unique(coords, axis=0, return_index=True)
    return np.sort(first)


def _init_random(points, k, rng, candidates):
    chosen = rng.choice(candidates, size=k, replace=False)
    return [points[i] for i in chosen]


def _init_plus_plus(points, k, rng, candidates):
    chosen = [int(rng.choice(candidates))]
    nearest = distances_to(points, points[chosen[0]]) ** 2
    for _ in range(1, k):
        weights = nearest[candidates]
        if weights.sum() <= 0:
            remaining = np.setdiff1d(candidates, chosen)
            nxt = int(rng.choice(remaining))
        else:
            nxt = int(rng.choice(candidates, p=weights / weights.sum()))
        chosen.append(nxt)
        nearest = np.minimum(nearest, distances_to(points, points[nxt]) ** 2)
    return [points[i] for i in chosen]


def _assign(points, centroids):
    distances = _distance_matrix(points, centroids)
    # argmin keeps the lowest centroid index on ties
    labels = np.argmin(distances, axis=1)
    return labels, distances


def _fill_empty_clusters(labels, distances, k, diagnostics):
    """Move the point farthest from its centroid into each empty cluster."""
    labels = labels.copy()
    own = distances[np.arange(labels.size), labels]
    taken = set()
    for j in range(k):
        if np.any(labels == j):
            continue
        counts = np.bincount(labels, minlength=k)
        order = np.argsort(-own, kind='stable')
        donor = next(i for i in order if i not in taken and counts[labels[i]] > 1)
        logger.warning(MESSAGES['empty_cluster'].format(j, int(donor)))
        diagnostics.append({'event': 'empty_cluster', 'cluster': j, 'point': int(donor)})
        labels[donor] = j
        own[donor] = 0.0
        taken.add(donor)
    return labels


def _update(points, labels, k, tol, diagnostics):
    centroids = []
    for j in range(k):
        members = [points[i] for i in np.flatnonzero(labels == j)]
        try:
            centroids.append(karcher_mean(members, tol=tol, max_iter=KARCHER_MAX_ITER))
        except NoConvergence as e:
            logger.warning(MESSAGES['no_convergence'].format(e.grad_norm, e.n_iter))
            diagnostics.append({'event': 'no_convergence', 'cluster': j, 'grad_norm': float(e.grad_norm)})
            centroids.append(e.best)
    return centroids


def _single_run(points, k, seed, max_iter, tol, init, karcher_tol, candidates) -> ClusterModel:
    rng = np.random.default_rng(seed)
    if init == 'pp':
        centroids = _init_plus_plus(points, k, rng, candidates)
    else:
        centroids = _init_random(points, k, rng, candidates)

    diagnostics = []
    labels, distances = _assign(points, centroids)
    labels = _fill_empty_clusters(labels, distances, k, diagnostics)

    trace = []
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        centroids = _update(points, labels, k, karcher_tol, diagnostics)
        current = inertia(points, labels, centroids)
        trace.append(current)

        new_labels, distances = _assign(points, centroids)
        new_labels = _fill_empty_clusters(new_labels, distances, k, diagnostics)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        if len(trace) > 1 and trace[-2] - current <= tol * trace[-2]:
            converged = True
            break
        if n_iter == max_iter:
            # labels stay paired with the centroids fitted to them
            break
        labels = new_labels

    labels.setflags(write=False)
    return ClusterModel(k=k, centroids=centroids, labels=labels, inertia=trace[-1], n_iter=n_iter,
                        converged=converged, inertia_trace=trace, diagnostics=diagnostics, seed=int(seed))


def kmeans(points: Sequence[ProductPoint], k: int, seed: int = 0, max_iter: int = KMEANS_MAX_ITER,
           tol: float = KMEANS_TOL, init: str = 'random', restarts: int = KMEANS_RESTARTS,
           karcher_tol: float = KARCHER_TOL) -> ClusterModel:
    """
    Riemannian k-means under product_distance

    Args:
        points: ProductPoints sharing n_pulses and order
        k: Number of clusters (<= number of distinct points)
        seed: Base seed; restart r uses SeedSequence(seed, spawn_key=(r,))
        max_iter: Maximum assignment/update rounds per run
        tol: Stop when the relative inertia improvement falls below tol
        init: 'random' (k distinct data points) or 'pp' (k-means++ seeding)
        restarts: Independent runs; the lowest inertia wins (first on ties)
        karcher_tol: Gradient tolerance of the centroid updates

    Returns:
        ClusterModel of the best run
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if max_iter < 1 or restarts < 1:
        raise ValidationError("max_iter and restarts must be >= 1")
    if init not in KMEANS_INIT_MODES:
        raise ValidationError(f"unknown init mode {init!r}, expected one of {KMEANS_INIT_MODES}")
    points = list(points)
    if not points:
        raise TooFewPoints("no points to cluster")
    candidates = _distinct_indices(points)
    if candidates.size < k:
        raise TooFewPoints(f"k = {k} exceeds the {candidates.size} distinct points")

    best = None
    for restart in range(restarts):
        run_seed = np.random.SeedSequence(int(seed), spawn_key=(restart,)).generate_state(2, np.uint64)[0]
        model = _single_run(points, k, int(run_seed), max_iter, tol, init, karcher_tol, candidates)
        logger.debug(f"Restart {restart}: inertia {model.inertia:.6f} after {model.n_iter} iterations")
        if best is None or model.inertia < best.inertia:
            best = model
    return best
