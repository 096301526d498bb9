#!/usr/bin/env python3
"""
Reflection-coefficient coding of range-cell time series

A stationary zero-mean cell is coded as (log P0, mu_1..mu_m) in R x D^m:
P0 the mean power and mu_k the reflection (Verblunsky) coefficients of its
AR model. This module estimates that coding with a regularized Burg lattice,
converts it to AR prediction coefficients and Toeplitz covariances (Levinson
recursion, both directions), and evaluates entropies and AR Doppler spectra.

Sign conventions: the AR model is z_t = -sum_k a_k z_{t-k} + sigma * w_t and
the covariance lags are r_j = E[z_{t+j} conj(z_t)], so r_1 = -mu_1 * P0.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.linalg import toeplitz
from tqdm import tqdm

try:
    from .config import LOG_PI_E, MU_MAX, TOEPLITZ_TOL
    from .errors import (EmptySeries, InvalidCoefficient, InvalidOrder, InvalidShape,
                         NotPositiveDefinite, NotToeplitz, OrderTooLarge, SingularBlock,
                         ValidationError, ZeroSignal)
    from .hermitian import as_hermitian, as_hpd
except ImportError:
    from config import LOG_PI_E, MU_MAX, TOEPLITZ_TOL
    from errors import (EmptySeries, InvalidCoefficient, InvalidOrder, InvalidShape,
                        NotPositiveDefinite, NotToeplitz, OrderTooLarge, SingularBlock,
                        ValidationError, ZeroSignal)
    from hermitian import as_hermitian, as_hpd

logger = logging.getLogger(__name__)

# Rounding slack on the clamp radius when validating points
_MU_SLACK = 1e-12


def _as_coefficients(mu) -> np.ndarray:
    mu = np.array(mu, dtype=complex, copy=True).reshape(-1)
    if not np.all(np.isfinite(mu)):
        raise InvalidCoefficient("reflection coefficients must be finite")
    if mu.size and np.max(np.abs(mu)) > MU_MAX * (1.0 + _MU_SLACK):
        raise InvalidCoefficient(
            f"reflection coefficient outside the unit disk (|mu| = {np.max(np.abs(mu)):.12f})")
    mu.setflags(write=False)
    return mu


@dataclass(frozen=True, eq=False)
class ReflectionPoint:
    """A range cell coded as (log P0, mu) in R x D^m"""

    log_p0: float
    mu: np.ndarray

    def __post_init__(self):
        log_p0 = float(self.log_p0)
        if not np.isfinite(log_p0):
            raise InvalidCoefficient("log_p0 must be finite")
        object.__setattr__(self, 'log_p0', log_p0)
        object.__setattr__(self, 'mu', _as_coefficients(self.mu))

    @property
    def order(self) -> int:
        return int(self.mu.size)

    @property
    def p0(self) -> float:
        return float(np.exp(self.log_p0))

    def to_dict(self) -> dict:
        return {
            'log_p0': self.log_p0,
            'mu': [[float(m.real), float(m.imag)] for m in self.mu],
        }


@dataclass(frozen=True, eq=False)
class ArModel:
    """AR prediction-error filter [1, a_1..a_m] with innovation power sigma2"""

    a: np.ndarray
    sigma2: float
    p0: float


def clamp_to_disk(mu: complex) -> complex:
    """Pull a coefficient back to radius MU_MAX, keeping its phase."""
    radius = abs(mu)
    if radius <= MU_MAX:
        return mu
    logger.debug(f"Clamping reflection coefficient |mu| = {radius:.12f}")
    return mu * (MU_MAX / radius)


def _step_up(a: np.ndarray, mu: complex) -> np.ndarray:
    """One Levinson order update: [a + mu * conj(reverse(a)), mu]."""
    return np.concatenate([a + mu * np.conj(a[::-1]), [mu]])


# =============================================================================
# ESTIMATION
# =============================================================================

def burg_regularized(series, order: int, gamma: float = 0.0) -> ReflectionPoint:
    """
    Regularized Burg estimate of the reflection coding of one cell

    Stage k picks mu_k minimizing the mean forward+backward prediction error
    power plus gamma * sum_j (2 pi j)^2 |a_j^(k)|^2, which gives

        mu_k = -(2 sum f b* + 2M sum_j w_j a_j a_{k-j})
               / (sum |f|^2 + |b|^2 + 2M sum_j w_j |a_{k-j}|^2)

    with M = n - k error terms, w_j = gamma (2 pi j)^2 and a_0 = 1. gamma = 0
    is classical Burg. Coefficients are clamped to |mu| <= MU_MAX.

    Args:
        series: Complex samples of one range cell
        order: Number of reflection coefficients (0 <= order <= n - 1)
        gamma: Smoothness penalty weight (>= 0)

    Returns:
        ReflectionPoint with log_p0 = log((1/n) sum |z_t|^2)
    """
    x = np.asarray(series, dtype=complex).reshape(-1)
    n = x.size
    if n == 0:
        raise EmptySeries("cannot estimate from an empty series")
    if order < 0:
        raise InvalidOrder(f"order must be >= 0, got {order}")
    if order > n - 1:
        raise OrderTooLarge(f"order {order} needs at least {order + 1} samples, got {n}")
    if gamma < 0:
        raise ValidationError(f"gamma must be >= 0, got {gamma}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("series has non-finite samples")

    p0 = float(np.mean(np.abs(x) ** 2))
    if p0 == 0.0:
        raise ZeroSignal("all samples are zero, log P0 is undefined")

    mus = np.zeros(order, dtype=complex)
    a = np.zeros(0, dtype=complex)
    # f holds f_{k-1}(t), b holds b_{k-1}(t-1) on the same index
    f = x[1:]
    b = x[:-1]
    for k in range(1, order + 1):
        num = 2.0 * np.sum(f * np.conj(b))
        den = float(np.sum(np.abs(f) ** 2 + np.abs(b) ** 2))
        if gamma > 0:
            weights = gamma * (2.0 * np.pi * np.arange(1, k + 1)) ** 2
            padded = np.concatenate([[1.0], a, [0.0]])
            a_j = padded[1:k + 1]
            a_kj = padded[k - 1::-1]
            num += 2.0 * f.size * np.sum(weights * a_j * a_kj)
            den += 2.0 * f.size * float(np.sum(weights * np.abs(a_kj) ** 2))
        mu = clamp_to_disk(-num / den) if den > 0 else 0j
        mus[k - 1] = mu
        f, b = f + mu * b, b + np.conj(mu) * f
        a = _step_up(a, mu)
        f = f[1:]
        b = b[:-1]

    return ReflectionPoint(np.log(p0), mus)


def burg_burst(burst, order: Optional[int] = None, gamma: float = 0.0,
               progress: bool = False) -> List[ReflectionPoint]:
    """
    Code every range cell (column) of a burst

    Args:
        burst: Burst or complex array (n_pulses x n_cells)
        order: Burg order, n_pulses - 1 when None
        gamma: Regularization weight
        progress: Show a tqdm progress bar
    """
    samples = np.asarray(getattr(burst, 'samples', burst))
    n_pulses, n_cells = samples.shape
    if order is None:
        order = n_pulses - 1
    cells = tqdm(range(n_cells), desc="Burg coding", disable=not progress)
    return [burg_regularized(samples[:, j], order, gamma) for j in cells]


# =============================================================================
# REPRESENTATION CHANGES
# =============================================================================

def levinson(point: ReflectionPoint) -> ArModel:
    """
    AR prediction coefficients of a reflection coding

    a^(k) = [a^(k-1) + mu_k conj(reverse(a^(k-1))), mu_k],
    sigma2 = P0 * prod(1 - |mu_k|^2).
    """
    a = np.zeros(0, dtype=complex)
    for mu in point.mu:
        a = _step_up(a, mu)
    p0 = point.p0
    sigma2 = p0 * float(np.prod(1.0 - np.abs(point.mu) ** 2))
    a.setflags(write=False)
    return ArModel(a=a, sigma2=sigma2, p0=p0)


def covariance_from_reflection(point: ReflectionPoint, size: int) -> np.ndarray:
    """
    Toeplitz HPD covariance (size x size) of a reflection coding

    Lags up to the model order come from the inverse Levinson recursion
    r_k = -mu_k sigma2_{k-1} - sum_{l<k} a_l r_{k-l}; higher lags follow the
    AR recursion r_j = -sum_k a_k r_{j-k}.
    """
    if size < 1:
        raise InvalidShape(f"covariance size must be >= 1, got {size}")
    r = np.zeros(size, dtype=complex)
    r[0] = point.p0
    a = np.zeros(0, dtype=complex)
    sigma2 = point.p0
    n_steps = min(point.order, size - 1)
    for k in range(1, n_steps + 1):
        mu = point.mu[k - 1]
        r[k] = -mu * sigma2 - np.dot(a, r[k - 1:0:-1])
        a = _step_up(a, mu)
        sigma2 *= 1.0 - abs(mu) ** 2
    m = a.size
    for j in range(n_steps + 1, size):
        r[j] = -np.dot(a, r[j - m:j][::-1])
    return as_hermitian(toeplitz(r, np.conj(r)), "covariance")


def reflection_from_covariance(R) -> ReflectionPoint:
    """
    Reflection coding of a Toeplitz HPD covariance (exact Levinson recursion)

    Raises:
        NotToeplitz: entries differ along a diagonal beyond TOEPLITZ_TOL * r_0
        NotPositiveDefinite: r_0 <= 0 or some |mu_k| >= 1
    """
    R = as_hermitian(R, "covariance")
    size = R.shape[0]
    r = np.array(R[:, 0])
    scale = max(abs(r[0]), np.finfo(float).tiny)
    if np.max(np.abs(R - toeplitz(r, np.conj(r)))) > TOEPLITZ_TOL * scale:
        raise NotToeplitz("covariance is not Toeplitz")
    r0 = float(r[0].real)
    if r0 <= 0:
        raise NotPositiveDefinite(f"covariance has r_0 = {r0:.3e}")

    mus = np.zeros(size - 1, dtype=complex)
    a = np.zeros(0, dtype=complex)
    sigma2 = r0
    for k in range(1, size):
        delta = r[k] + np.dot(a, r[k - 1:0:-1])
        mu = -delta / sigma2
        if abs(mu) >= 1.0:
            raise NotPositiveDefinite(f"covariance is not positive definite (|mu_{k}| = {abs(mu):.6f})")
        mus[k - 1] = mu
        a = _step_up(a, mu)
        sigma2 *= 1.0 - abs(mu) ** 2
    return ReflectionPoint(np.log(r0), mus)


# =============================================================================
# ENTROPY AND SPECTRA
# =============================================================================

def entropy_scalar(point: ReflectionPoint, n: int) -> float:
    """
    Entropy of the n x n Toeplitz covariance in reflection coordinates

    S = -sum_k (n - k) log(1 - |mu_k|^2) - n log(pi e P0)

    This is -log det(pi e R): it grows as any |mu_k| approaches 1. The
    additive constant of the log-det entropy is kept as printed.
    """
    if n < point.order + 1:
        raise InvalidOrder(f"n = {n} is too small for {point.order} coefficients")
    k = np.arange(1, point.order + 1)
    shape_term = -np.sum((n - k) * np.log1p(-np.abs(point.mu) ** 2))
    return float(shape_term - n * (LOG_PI_E + point.log_p0))


def entropy_matrix(params, N: int) -> float:
    """
    Entropy of a block-Toeplitz covariance from its matrix AR parameters

    S = -sum_k (N - k) log det(I - A_k A_k^+) - N log det(pi e R0)

    Args:
        params: SiegelParams (R0 and the Siegel-disk blocks A_1..A_{N-1})
        N: Number of blocks (>= len(A) + 1)

    Raises:
        SingularBlock: det(I - A_k A_k^+) <= 0
    """
    blocks = [np.asarray(getattr(A, 'Z', A)) for A in params.A]
    if N < len(blocks) + 1:
        raise InvalidOrder(f"N = {N} is too small for {len(blocks)} blocks")
    R0 = as_hpd(params.R0, "R0")
    p = R0.shape[0]
    identity = np.eye(p)
    total = 0.0
    for k, A in enumerate(blocks, start=1):
        w = np.linalg.eigvalsh(identity - A @ A.conj().T)
        if w[0] <= 0:
            raise SingularBlock(f"det(I - A_{k} A_{k}^+) <= 0")
        total -= (N - k) * float(np.sum(np.log(w)))
    logdet_r0 = float(np.sum(np.log(np.linalg.eigvalsh(R0))))
    return total - N * (p * LOG_PI_E + logdet_r0)


def doppler_frequencies(n_freq: int) -> np.ndarray:
    """Normalized Doppler grid f_j = j / n_freq - 1/2."""
    return np.arange(n_freq) / n_freq - 0.5


def doppler_spectrum(model: ArModel, n_freq: int) -> np.ndarray:
    """
    AR power spectral density sigma2 / |1 + sum_k a_k e^{-i 2 pi f k}|^2

    Evaluated on doppler_frequencies(n_freq); its mean approximates P0.
    """
    if n_freq < 2:
        raise InvalidShape(f"n_freq must be >= 2, got {n_freq}")
    freqs = doppler_frequencies(n_freq)
    lags = np.arange(1, model.a.size + 1)
    transfer = 1.0 + np.exp(-2j * np.pi * np.outer(freqs, lags)) @ model.a
    return model.sigma2 / np.abs(transfer) ** 2
