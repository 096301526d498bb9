#!/usr/bin/env python3
"""
Complex Hermitian / HPD matrix kernel

Eigendecomposition, square root, inverse square root, logarithm, exponential
and norms of Hermitian matrices. Every geometry module goes through these
functions so that matrix functions are computed one way only.

Matrices are plain complex numpy arrays. Validated matrices are returned as
read-only copies, Hermitized as (H + H^+) / 2.
"""

import numpy as np

try:
    from .config import EIG_REGULARIZE_FLOOR, HERMITIAN_TOL
    from .errors import DimensionMismatch, NotHermitian, NotPositiveDefinite, ValidationError
except ImportError:
    from config import EIG_REGULARIZE_FLOOR, HERMITIAN_TOL
    from errors import DimensionMismatch, NotHermitian, NotPositiveDefinite, ValidationError


def _frozen(array):
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


def as_complex_matrix(M, name="matrix"):
    """Validate a finite 2-D matrix with at least one row and column."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError(f"{name} has non-finite entries")
    return _frozen(M)


def as_hermitian(H, name="matrix"):
    """
    Validate Hermitian symmetry and return the Hermitized copy

    Raises:
        NotHermitian: ||H - H^+||_F > HERMITIAN_TOL * ||H||_F
    """
    H = as_complex_matrix(H, name)
    if H.shape[0] != H.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {H.shape}")
    scale = np.linalg.norm(H, 'fro')
    asymmetry = np.linalg.norm(H - H.conj().T, 'fro')
    if asymmetry > HERMITIAN_TOL * scale:
        raise NotHermitian(f"{name} is not Hermitian (relative asymmetry {asymmetry / scale:.3e})")
    return _frozen((H + H.conj().T) / 2)


def as_hpd(H, name="matrix"):
    """Validate a Hermitian positive definite matrix (lambda_min > 0)."""
    H = as_hermitian(H, name)
    w = np.linalg.eigvalsh(H)
    if w[0] <= 0:
        raise NotPositiveDefinite(f"{name} is not positive definite (lambda_min = {w[0]:.3e})")
    return H


def hermitian_eig(H):
    """
    Eigendecomposition H = V diag(w) V^+ of a Hermitian matrix

    Eigenvalues are returned in descending order. Each eigenvector is scaled
    so that its largest-magnitude component is real positive (first index
    wins ties), which makes the output deterministic.

    Returns:
        (w, V): real eigenvalues, unitary eigenvector matrix
    """
    H = as_hermitian(H)
    w, V = np.linalg.eigh(H)
    w = w[::-1]
    V = V[:, ::-1].copy()
    pivots = np.argmax(np.abs(V), axis=0)
    anchor = V[pivots, np.arange(V.shape[1])]
    V = V * (np.abs(anchor) / anchor)[np.newaxis, :]
    w.setflags(write=False)
    return w, _frozen(V)


def _spectral_map(H, fn, regularize, name):
    w, V = hermitian_eig(H)
    if regularize:
        if w[0] <= 0:
            raise NotPositiveDefinite(f"{name}: no positive eigenvalue to regularize against")
        w = np.maximum(w, EIG_REGULARIZE_FLOOR * w[0])
    elif w[-1] <= 0:
        raise NotPositiveDefinite(f"{name}: matrix is not positive definite (lambda_min = {w[-1]:.3e})")
    return _frozen((V * fn(w)[np.newaxis, :]) @ V.conj().T)


def hpd_sqrt(H, regularize=False):
    """Principal square root of an HPD matrix."""
    return _spectral_map(H, np.sqrt, regularize, "hpd_sqrt")


def hpd_inv_sqrt(H, regularize=False):
    """Inverse principal square root H^(-1/2) of an HPD matrix."""
    return _spectral_map(H, lambda w: 1.0 / np.sqrt(w), regularize, "hpd_inv_sqrt")


def hpd_log(H, regularize=False):
    """Principal logarithm of an HPD matrix (a Hermitian matrix)."""
    return _spectral_map(H, np.log, regularize, "hpd_log")


def hermitian_exp(H):
    """Matrix exponential of a Hermitian matrix (an HPD matrix)."""
    w, V = hermitian_eig(H)
    return _frozen((V * np.exp(w)[np.newaxis, :]) @ V.conj().T)


def matrix_norms(M):
    """
    Frobenius and spectral norms of a complex matrix

    Returns:
        (frobenius, spectral) with spectral <= frobenius
    """
    M = as_complex_matrix(M)
    frobenius = float(np.linalg.norm(M, 'fro'))
    spectral = float(np.linalg.norm(M, 2))
    # rank-one matrices can round the spectral norm above the Frobenius norm
    return frobenius, min(spectral, frobenius)
