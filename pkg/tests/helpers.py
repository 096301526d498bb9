import numpy as np

from poincare import ProductPoint


def random_hpd(rng, dim, spread=1.0):
    """Random HPD matrix with eigenvalues in [exp(-spread), exp(spread)]."""
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    w = np.exp(rng.uniform(-spread, spread, dim))
    return (Q * w) @ Q.conj().T


def random_disk(rng, size=None, radius=0.95):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size))
    return r * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size))


def random_siegel(rng, dim, radius=0.9):
    """Random matrix with spectral norm radius * U(0, 1)."""
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Z * (radius * rng.uniform(0.05, 1.0) / np.linalg.norm(Z, 2))


def random_point(rng, n_pulses=8, order=None):
    order = n_pulses - 1 if order is None else order
    return ProductPoint(rng.normal(0.0, 1.0), random_disk(rng, order, 0.9), n_pulses)
