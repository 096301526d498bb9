#!/usr/bin/env python3
"""
Geometry of the product space R x D^m of reflection codings

Distances follow the printed convention d(z1, z2) = log((1 + delta) / (1 - delta))
with delta the modulus of the Mobius transfer, i.e. 2 artanh(delta): twice the
textbook Poincare distance. The Riemannian metric integrating to that distance
is 4 |dmu|^2 / (1 - |mu|^2)^2 per disk; metric_form, exp/log maps and the
barycenter gradient flows all use that scale so that they agree with the
distance. Component k of a point built on n pulses carries weight n - k, the
log-power component weight n.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

try:
    from .config import (KARCHER_INITIAL_STEP, KARCHER_MAX_ITER, KARCHER_MIN_STEP, KARCHER_TOL,
                         MEDIAN_ANCHOR_RADIUS, MU_MAX)
    from .errors import DimensionMismatch, NoConvergence, OutsideDisk, TooFewPoints, ValidationError
    from .estimate import ReflectionPoint
except ImportError:
    from config import (KARCHER_INITIAL_STEP, KARCHER_MAX_ITER, KARCHER_MIN_STEP, KARCHER_TOL,
                        MEDIAN_ANCHOR_RADIUS, MU_MAX)
    from errors import DimensionMismatch, NoConvergence, OutsideDisk, TooFewPoints, ValidationError
    from estimate import ReflectionPoint

logger = logging.getLogger(__name__)

# log((1+d)/(1-d)) = DISTANCE_SCALE * artanh(d); the textbook distance has scale 1
DISTANCE_SCALE = 2.0
DISK_METRIC_FACTOR = DISTANCE_SCALE ** 2

# Relative slack when comparing objectives of successive iterates
_OBJECTIVE_SLACK = 4 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class ProductPoint(ReflectionPoint):
    """A reflection coding together with the pulse count weighting its components"""

    n_pulses: int

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, 'n_pulses', int(self.n_pulses))
        if self.n_pulses <= self.order:
            raise DimensionMismatch(
                f"n_pulses = {self.n_pulses} must exceed the number of coefficients ({self.order})")

    @classmethod
    def from_reflection(cls, point: ReflectionPoint, n_pulses: int) -> "ProductPoint":
        return cls(point.log_p0, point.mu, n_pulses)

    def to_dict(self) -> dict:
        data = super().to_dict()
        data['n_pulses'] = self.n_pulses
        return data


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Tangent vector (d log P0, d mu) at a ProductPoint"""

    d_log_p0: float
    d_mu: np.ndarray

    def __post_init__(self):
        d_mu = np.array(self.d_mu, dtype=complex, copy=True).reshape(-1)
        if not (np.isfinite(self.d_log_p0) and np.all(np.isfinite(d_mu))):
            raise ValidationError("tangent vector entries must be finite")
        d_mu.setflags(write=False)
        object.__setattr__(self, 'd_log_p0', float(self.d_log_p0))
        object.__setattr__(self, 'd_mu', d_mu)


# =============================================================================
# SINGLE DISK
# =============================================================================

def _check_disk(*values):
    for z in values:
        if np.any(np.abs(z) >= 1.0):
            raise OutsideDisk(f"point outside the open unit disk: {z}")


def mobius(a, z):
    """Disk automorphism phi_a(z) = (z - a) / (1 - conj(a) z), sending a to 0."""
    return (z - a) / (1.0 - np.conj(a) * z)


def _mobius_inverse(a, u):
    return (u + a) / (1.0 + np.conj(a) * u)


def _disk_distance(z1, z2):
    # |1 - conj(z1) z2|^2 = |z1 - z2|^2 + (1 - |z1|^2)(1 - |z2|^2) keeps this exactly symmetric
    gap = np.abs(z1 - z2) ** 2
    delta = np.sqrt(gap / (gap + (1.0 - np.abs(z1) ** 2) * (1.0 - np.abs(z2) ** 2)))
    return DISTANCE_SCALE * np.arctanh(delta)


def _exp_disk(base, v):
    w = v / (1.0 - np.abs(base) ** 2)
    r = np.abs(w)
    safe = np.where(r > 0, r, 1.0)
    u = np.where(r > 0, np.tanh(r) * w / safe, 0.0)
    radius = np.abs(u)
    u = np.where(radius > MU_MAX, u * (MU_MAX / np.where(radius > 0, radius, 1.0)), u)
    return _mobius_inverse(base, u)


def _log_disk(base, z):
    u = mobius(base, z)
    r = np.abs(u)
    safe = np.where(r > 0, r, 1.0)
    w = np.where(r > 0, np.arctanh(r) * u / safe, 0.0)
    return w * (1.0 - np.abs(base) ** 2)


def poincare_distance(z1: complex, z2: complex) -> float:
    """log((1 + delta) / (1 - delta)), delta = |(z2 - z1) / (1 - conj(z1) z2)|."""
    _check_disk(z1, z2)
    return float(_disk_distance(complex(z1), complex(z2)))


def exp_map(base: complex, v: complex) -> complex:
    """
    Riemannian exponential on the disk

    v is moved to the origin by phi_base (scaled by 1 / (1 - |base|^2)),
    mapped by exp_0(w) = tanh(|w|) w / |w| and sent back by phi_base^-1, so
    d(base, exp_map(base, v)) = 2 |v| / (1 - |base|^2).
    """
    _check_disk(base)
    return complex(_exp_disk(complex(base), complex(v)))


def log_map(base: complex, target: complex) -> complex:
    """Inverse of exp_map; its metric norm equals poincare_distance(base, target)."""
    _check_disk(base, target)
    return complex(_log_disk(complex(base), complex(target)))


# =============================================================================
# PRODUCT SPACE R x D^m
# =============================================================================

def _disk_weights(n_pulses: int, order: int) -> np.ndarray:
    return (n_pulses - np.arange(1, order + 1)).astype(float)


def _require_same_shape(x: ProductPoint, y: ProductPoint):
    if x.n_pulses != y.n_pulses or x.order != y.order:
        raise DimensionMismatch(
            f"points differ in shape: (n={x.n_pulses}, m={x.order}) vs (n={y.n_pulses}, m={y.order})")


def metric_form(point: ProductPoint, v: TangentVector) -> float:
    """ds^2 = n dlogP0^2 + sum_k (n - k) 4 |dmu_k|^2 / (1 - |mu_k|^2)^2."""
    if v.d_mu.size != point.order:
        raise DimensionMismatch(f"tangent has {v.d_mu.size} disk components, point has {point.order}")
    disk = DISK_METRIC_FACTOR * np.abs(v.d_mu) ** 2 / (1.0 - np.abs(point.mu) ** 2) ** 2
    return float(point.n_pulses * v.d_log_p0 ** 2
                 + np.sum(_disk_weights(point.n_pulses, point.order) * disk))


def product_distance(x: ProductPoint, y: ProductPoint) -> float:
    """d^2 = n (log P0_y - log P0_x)^2 + sum_k (n - k) poincare_distance(mu_x,k, mu_y,k)^2."""
    _require_same_shape(x, y)
    disk = _disk_distance(x.mu, y.mu) ** 2
    return float(np.sqrt(x.n_pulses * (y.log_p0 - x.log_p0) ** 2
                         + np.sum(_disk_weights(x.n_pulses, x.order) * disk)))


def product_log(x: ProductPoint, y: ProductPoint) -> TangentVector:
    _require_same_shape(x, y)
    return TangentVector(y.log_p0 - x.log_p0, _log_disk(x.mu, y.mu))


def product_exp(x: ProductPoint, v: TangentVector) -> ProductPoint:
    if v.d_mu.size != x.order:
        raise DimensionMismatch(f"tangent has {v.d_mu.size} disk components, point has {x.order}")
    return ProductPoint(x.log_p0 + v.d_log_p0, _exp_disk(x.mu, v.d_mu), x.n_pulses)


def stack_points(points: Sequence[ProductPoint]) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Stack points into arrays

    Returns:
        (log_p0 of shape (N,), mu of shape (N, m), n_pulses)
    """
    if len(points) == 0:
        raise TooFewPoints("at least one point is required")
    first = points[0]
    for point in points[1:]:
        _require_same_shape(first, point)
    log_p0 = np.array([p.log_p0 for p in points], dtype=float)
    mu = np.array([p.mu for p in points], dtype=complex).reshape(len(points), first.order)
    return log_p0, mu, first.n_pulses


def _distances(log_p0_x, mu_x, log_p0, mu, n_pulses):
    weights = _disk_weights(n_pulses, mu.shape[1])
    disk = _disk_distance(mu_x[np.newaxis, :], mu) ** 2
    return np.sqrt(n_pulses * (log_p0 - log_p0_x) ** 2 + disk @ weights)


def distances_to(points: Sequence[ProductPoint], y: ProductPoint) -> np.ndarray:
    """product_distance(p, y) for every p in points."""
    log_p0, mu, n_pulses = stack_points(points)
    _require_same_shape(points[0], y)
    return _distances(y.log_p0, y.mu, log_p0, mu, n_pulses)


# =============================================================================
# BARYCENTERS
# =============================================================================

def _normalized_weights(weights, count: int) -> np.ndarray:
    if weights is None:
        return np.full(count, 1.0 / count)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != count:
        raise DimensionMismatch(f"{w.size} weights for {count} points")
    if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
        raise ValidationError("weights must be finite, non-negative and not all zero")
    return w / w.sum()


def _tangent_norm(mu_x, d_log_p0, d_mu, n_pulses):
    disk = DISK_METRIC_FACTOR * np.abs(d_mu) ** 2 / (1.0 - np.abs(mu_x) ** 2) ** 2
    return float(np.sqrt(n_pulses * d_log_p0 ** 2 + disk @ _disk_weights(n_pulses, mu_x.size)))


def _slopes(mu_x, d_mu):
    # metric length of each disk component of a tangent vector
    return np.abs(d_mu) / (1.0 - np.abs(mu_x) ** 2)


def karcher_mean(points: Sequence[ProductPoint], weights=None, tol: float = KARCHER_TOL,
                 max_iter: int = KARCHER_MAX_ITER) -> ProductPoint:
    """
    Weighted Frechet mean: argmin_x sum_i w_i d^2(x, p_i)

    The log-power component is the weighted arithmetic mean of log P0.
    The objective separates over disk components, so each one runs its own
    gradient flow x_k <- exp(step_k * sum_i w_i log_x(p_ik)). Every iteration
    starts each step_k at KARCHER_INITIAL_STEP and halves it until that
    component's objective or its gradient shrinks.

    Raises:
        NoConvergence: gradient norm still >= tol after max_iter iterations,
            or no component can move; the exception carries the best iterate
    """
    log_p0, mu, n_pulses = stack_points(points)
    w = _normalized_weights(weights, len(points))
    mean_log_p0 = float(w @ log_p0)
    if len(points) == 1:
        return ProductPoint(points[0].log_p0, points[0].mu, n_pulses)

    def objective(x):
        return w @ (_disk_distance(x[np.newaxis, :], mu) ** 2)

    def gradient_at(x):
        return w @ _log_disk(x[np.newaxis, :], mu)

    x = w @ mu
    value = objective(x)
    gradient = gradient_at(x)
    grad_norm = _tangent_norm(x, 0.0, gradient, n_pulses)
    n_iter = 0
    while grad_norm >= tol:
        if n_iter == max_iter:
            break
        n_iter += 1
        slope = _slopes(x, gradient)
        step = np.full(mu.shape[1], KARCHER_INITIAL_STEP)
        pending = gradient != 0
        moved = np.zeros(mu.shape[1], dtype=bool)
        while np.any(pending):
            candidate = np.where(pending, _exp_disk(x, step * gradient), x)
            candidate_value = objective(candidate)
            candidate_gradient = gradient_at(candidate)
            accepted = pending & ((candidate_value <= value * (1.0 + _OBJECTIVE_SLACK))
                                  | (_slopes(candidate, candidate_gradient) < slope))
            x = np.where(accepted, candidate, x)
            value = np.where(accepted, candidate_value, value)
            moved |= accepted
            pending &= ~accepted
            step = np.where(pending, step / 2.0, step)
            pending &= step >= KARCHER_MIN_STEP
        gradient = gradient_at(x)
        grad_norm = _tangent_norm(x, 0.0, gradient, n_pulses)
        if not np.any(moved):
            break
    else:
        return ProductPoint(mean_log_p0, x, n_pulses)

    best = ProductPoint(mean_log_p0, x, n_pulses)
    raise NoConvergence(f"Karcher mean: gradient norm {grad_norm:.3e} after {n_iter} iterations",
                        best=best, grad_norm=grad_norm, n_iter=n_iter)


def frechet_median(points: Sequence[ProductPoint], weights=None, tol: float = KARCHER_TOL,
                   max_iter: int = KARCHER_MAX_ITER) -> ProductPoint:
    """
    Weighted Frechet median: argmin_x sum_i w_i d(x, p_i)

    Riemannian Weiszfeld flow x <- exp_x(step * sum_i (w_i / d_i) log_x(p_i)
    / sum_i (w_i / d_i)), started at the best data point. Each iteration
    starts at KARCHER_INITIAL_STEP and halves the step until the objective or
    the gradient norm shrinks. When the iterate sits on data points (within
    MEDIAN_ANCHOR_RADIUS) it is the median iff the pull of the other points
    does not exceed the weight sitting there.

    Raises:
        NoConvergence: carries the best iterate and the iterations run
    """
    log_p0, mu, n_pulses = stack_points(points)
    w = _normalized_weights(weights, len(points))
    if len(points) == 1:
        return ProductPoint(points[0].log_p0, points[0].mu, n_pulses)

    def objective(x_log_p0, x_mu):
        return float(w @ _distances(x_log_p0, x_mu, log_p0, mu, n_pulses))

    def pull_at(x_log_p0, x_mu):
        dist = _distances(x_log_p0, x_mu, log_p0, mu, n_pulses)
        free = dist > MEDIAN_ANCHOR_RADIUS
        pull = w[free] / dist[free]
        g_log_p0 = pull @ (log_p0[free] - x_log_p0)
        g_mu = pull @ _log_disk(x_mu[np.newaxis, :], mu[free])
        return g_log_p0, g_mu, pull.sum(), float(w[~free].sum())

    def converged(x_mu, g_log_p0, g_mu, anchor_weight):
        norm = _tangent_norm(x_mu, g_log_p0, g_mu, n_pulses)
        if anchor_weight > 0:
            return norm <= anchor_weight, norm
        return norm < tol, norm

    start = int(np.argmin([objective(log_p0[i], mu[i]) for i in range(len(points))]))
    x_log_p0, x_mu = float(log_p0[start]), mu[start].copy()
    value = objective(x_log_p0, x_mu)
    g_log_p0, g_mu, total_pull, anchor_weight = pull_at(x_log_p0, x_mu)
    done, grad_norm = converged(x_mu, g_log_p0, g_mu, anchor_weight)
    n_iter = 0
    while not done and n_iter < max_iter:
        n_iter += 1
        d_log_p0, d_mu = g_log_p0 / total_pull, g_mu / total_pull
        step = KARCHER_INITIAL_STEP
        while step >= KARCHER_MIN_STEP:
            c_log_p0 = x_log_p0 + step * d_log_p0
            c_mu = _exp_disk(x_mu, step * d_mu)
            c_value = objective(c_log_p0, c_mu)
            c_pull = pull_at(c_log_p0, c_mu)
            c_norm = _tangent_norm(c_mu, c_pull[0], c_pull[1], n_pulses)
            if c_value <= value * (1.0 + _OBJECTIVE_SLACK) or c_norm < grad_norm:
                x_log_p0, x_mu, value = c_log_p0, c_mu, c_value
                g_log_p0, g_mu, total_pull, anchor_weight = c_pull
                break
            step /= 2.0
        else:
            break
        done, grad_norm = converged(x_mu, g_log_p0, g_mu, anchor_weight)
    if done:
        return ProductPoint(x_log_p0, x_mu, n_pulses)

    best = ProductPoint(x_log_p0, x_mu, n_pulses)
    raise NoConvergence(f"Frechet median: gradient norm {grad_norm:.3e} after {n_iter} iterations",
                        best=best, grad_norm=grad_norm, n_iter=n_iter)


def frechet_objective(points: Sequence[ProductPoint], x: ProductPoint, weights=None,
                      power: int = 2) -> float:
    """sum_i w_i d(x, p_i)^power (power 2: mean objective, 1: median objective)."""
    w = _normalized_weights(weights, len(points))
    return float(w @ distances_to(points, x) ** power)
