#!/usr/bin/env python3
"""
Matrix-valued geometry of block-Toeplitz covariances

A block-Toeplitz covariance is parameterized by (R0, A_1..A_{N-1}) with R0 HPD
and every A_k in the Siegel disk {Z : I - Z Z^+ > 0}. This module provides the
Siegel-disk automorphism Phi_Z, the Siegel and affine-invariant HPD distances,
their weighted combination and the matching metric form. At block size 1 every
function reduces to its scalar counterpart in poincare.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

try:
    from .config import PIVOT_CONDITION_MAX, SIEGEL_MARGIN, TRACE_IMAG_TOL
    from .errors import DimensionMismatch, OutsideDisk, SingularPivot, ValidationError
    from .hermitian import as_complex_matrix, as_hermitian, as_hpd, hpd_inv_sqrt, hpd_log, hpd_sqrt, matrix_norms
    from .poincare import DISK_METRIC_FACTOR, DISTANCE_SCALE
except ImportError:
    from config import PIVOT_CONDITION_MAX, SIEGEL_MARGIN, TRACE_IMAG_TOL
    from errors import DimensionMismatch, OutsideDisk, SingularPivot, ValidationError
    from hermitian import as_complex_matrix, as_hermitian, as_hpd, hpd_inv_sqrt, hpd_log, hpd_sqrt, matrix_norms
    from poincare import DISK_METRIC_FACTOR, DISTANCE_SCALE

logger = logging.getLogger(__name__)

SIEGEL_DISTANCE_MODES = ('spectral', 'full')


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    """Square matrix Z with spectral norm < 1 (equivalently I - Z Z^+ > 0)"""

    Z: np.ndarray

    def __post_init__(self):
        Z = as_complex_matrix(self.Z, "Siegel point")
        if Z.shape[0] != Z.shape[1]:
            raise DimensionMismatch(f"Siegel point must be square, got shape {Z.shape}")
        _, spectral = matrix_norms(Z)
        if 1.0 - spectral <= SIEGEL_MARGIN:
            raise OutsideDisk(f"spectral norm {spectral:.15f} is not below 1 - {SIEGEL_MARGIN}")
        object.__setattr__(self, 'Z', Z)

    @property
    def dim(self) -> int:
        return self.Z.shape[0]


@dataclass(frozen=True, eq=False)
class SiegelParams:
    """Block-Toeplitz coordinates (R0, A_1..A_{N-1}), N = len(A) + 1"""

    R0: np.ndarray
    A: Tuple[SiegelPoint, ...]

    def __post_init__(self):
        R0 = as_hpd(self.R0, "R0")
        blocks = tuple(a if isinstance(a, SiegelPoint) else SiegelPoint(a) for a in self.A)
        for k, block in enumerate(blocks, start=1):
            if block.dim != R0.shape[0]:
                raise DimensionMismatch(f"A_{k} is {block.dim}x{block.dim}, R0 is {R0.shape[0]}x{R0.shape[0]}")
        object.__setattr__(self, 'R0', R0)
        object.__setattr__(self, 'A', blocks)

    @property
    def N(self) -> int:
        return len(self.A) + 1

    @property
    def p(self) -> int:
        return self.R0.shape[0]


def _as_point(Z) -> SiegelPoint:
    return Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)


def _solve_right(B, M):
    """B @ inv(M) without forming the inverse."""
    return np.linalg.solve(M.T, B.T).T


# =============================================================================
# SIEGEL DISK
# =============================================================================

def siegel_phi(Z, W) -> np.ndarray:
    """
    Phi_Z(W) = (I - Z Z^+)^(-1/2) (W - Z) (I - Z^+ W)^(-1) (I - Z^+ Z)^(1/2)

    Raises:
        SingularPivot: condition number of I - Z^+ W above PIVOT_CONDITION_MAX
    """
    Z, W = _as_point(Z).Z, _as_point(W).Z
    if Z.shape != W.shape:
        raise DimensionMismatch(f"Siegel points differ in size: {Z.shape} vs {W.shape}")
    identity = np.eye(Z.shape[0])
    Zh = Z.conj().T
    pivot = identity - Zh @ W
    condition = np.linalg.cond(pivot)
    if not np.isfinite(condition) or condition > PIVOT_CONDITION_MAX:
        raise SingularPivot(f"I - Z^+ W is numerically singular (condition {condition:.3e})")
    left = hpd_inv_sqrt(identity - Z @ Zh)
    right = hpd_sqrt(identity - Zh @ Z)
    phi = left @ _solve_right(W - Z, pivot) @ right
    _, spectral = matrix_norms(phi)
    if spectral >= 1.0:
        raise OutsideDisk(f"Phi_Z(W) left the Siegel disk (spectral norm {spectral:.15f})")
    return phi


def siegel_distance(Z1, Z2, mode: str = 'spectral') -> float:
    """
    Distance log((1 + s) / (1 - s)) with s the spectral norm of Phi_Z1(Z2)

    mode='full' combines all singular values s_i of Phi instead:
    d^2 = sum_i log^2((1 + s_i) / (1 - s_i)).
    """
    if mode not in SIEGEL_DISTANCE_MODES:
        raise ValidationError(f"unknown Siegel distance mode {mode!r}, expected one of {SIEGEL_DISTANCE_MODES}")
    singular = np.linalg.svd(siegel_phi(Z1, Z2), compute_uv=False)
    if mode == 'spectral':
        return float(DISTANCE_SCALE * np.arctanh(singular[0]))
    return float(np.sqrt(np.sum((DISTANCE_SCALE * np.arctanh(singular)) ** 2)))


# =============================================================================
# HPD CONE AND BLOCK-TOEPLITZ PARAMETERS
# =============================================================================

def hpd_affine_distance(R1, R2) -> float:
    """||log(R1^(-1/2) R2 R1^(-1/2))||_F."""
    R1, R2 = as_hpd(R1, "R1"), as_hpd(R2, "R2")
    if R1.shape != R2.shape:
        raise DimensionMismatch(f"HPD matrices differ in size: {R1.shape} vs {R2.shape}")
    S = hpd_inv_sqrt(R1)
    congruence = S @ R2 @ S
    frobenius, _ = matrix_norms(hpd_log((congruence + congruence.conj().T) / 2))
    return frobenius


def _require_same_geometry(P1: SiegelParams, P2: SiegelParams):
    if P1.N != P2.N or P1.p != P2.p:
        raise DimensionMismatch(f"parameters differ: (N={P1.N}, p={P1.p}) vs (N={P2.N}, p={P2.p})")


def block_toeplitz_distance(P1: SiegelParams, P2: SiegelParams, mode: str = 'spectral') -> float:
    """d^2 = N d_HPD(R0_1, R0_2)^2 + sum_k (N - k) d_Siegel(A_1k, A_2k)^2."""
    _require_same_geometry(P1, P2)
    N = P1.N
    total = N * hpd_affine_distance(P1.R0, P2.R0) ** 2
    for k, (A1, A2) in enumerate(zip(P1.A, P2.A), start=1):
        total += (N - k) * siegel_distance(A1, A2, mode) ** 2
    return float(np.sqrt(total))


def matrix_metric_form(P: SiegelParams, dR0, dA: Sequence) -> float:
    """
    ds^2 = N Tr[(R0^-1 dR0)^2]
           + 4 sum_k (N - k) Tr[(I - A_k A_k^+)^-1 dA_k (I - A_k^+ A_k)^-1 dA_k^+]

    The factor 4 is the disk metric scale matching the distance convention.
    """
    dR0 = as_hermitian(dR0, "dR0")
    if dR0.shape != P.R0.shape or len(dA) != len(P.A):
        raise DimensionMismatch("perturbation shapes do not match the parameters")
    N = P.N
    identity = np.eye(P.p)
    ratio = np.linalg.solve(P.R0, dR0)
    total = N * np.trace(ratio @ ratio)
    for k, (block, dA_k) in enumerate(zip(P.A, dA), start=1):
        dA_k = as_complex_matrix(dA_k, f"dA_{k}")
        if dA_k.shape != block.Z.shape:
            raise DimensionMismatch(f"dA_{k} has shape {dA_k.shape}, expected {block.Z.shape}")
        A = block.Z
        left = np.linalg.solve(identity - A @ A.conj().T, dA_k)
        right = np.linalg.solve(identity - A.conj().T @ A, dA_k.conj().T)
        total += DISK_METRIC_FACTOR * (N - k) * np.trace(left @ right)
    if abs(total.imag) > TRACE_IMAG_TOL * max(1.0, abs(total.real)):
        raise ValidationError(f"metric form has an imaginary residue {total.imag:.3e}")
    return float(total.real)


# =============================================================================
# JSON SERIALIZATION
# =============================================================================

def matrix_to_json(M) -> list:
    """Nested rows of [re, im] pairs."""
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(M, dtype=complex)]


def matrix_from_json(rows) -> np.ndarray:
    try:
        data = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"matrix must be nested [re, im] pairs: {e}") from e
    if data.ndim != 3 or data.shape[-1] != 2:
        raise ValidationError(f"matrix must be nested [re, im] pairs, got array of shape {data.shape}")
    return data[..., 0] + 1j * data[..., 1]


def params_to_json(P: SiegelParams) -> dict:
    return {
        'R0': matrix_to_json(P.R0),
        'A': [matrix_to_json(block.Z) for block in P.A],
    }


def params_from_json(data: dict) -> SiegelParams:
    unknown = set(data) - {'R0', 'A'}
    if unknown:
        raise ValidationError(f"unknown keys in Siegel parameters: {sorted(unknown)}")
    if 'R0' not in data:
        raise ValidationError("Siegel parameters need an R0 entry")
    return SiegelParams(matrix_from_json(data['R0']), tuple(matrix_from_json(a) for a in data.get('A', [])))
