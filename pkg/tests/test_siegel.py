import itertools

import numpy as np
import pytest

from errors import DimensionMismatch, NotPositiveDefinite, OutsideDisk, ValidationError
from helpers import random_disk, random_hpd, random_siegel
from poincare import ProductPoint, TangentVector, metric_form, mobius, poincare_distance, product_distance
from siegel import (SiegelParams, SiegelPoint, block_toeplitz_distance, hpd_affine_distance, matrix_metric_form,
                    params_from_json, params_to_json, siegel_distance, siegel_phi)


def scalar_params(log_p0, mu):
    return SiegelParams(np.array([[np.exp(log_p0)]]), tuple(np.array([[m]]) for m in mu))


def random_params(rng, p=2, N=3):
    return SiegelParams(random_hpd(rng, p), tuple(random_siegel(rng, p) for _ in range(N - 1)))


def assert_triangle(D, slack=1e-9):
    """D[i, k] <= D[i, j] + D[j, k] for every triple of a distance table."""
    assert np.all(D[:, np.newaxis, :] <= D[:, :, np.newaxis] + D[np.newaxis, :, :] + slack)


class TestSiegelPoint:
    def test_rejects_boundary(self):
        with pytest.raises(OutsideDisk):
            SiegelPoint(np.eye(2))
        with pytest.raises(DimensionMismatch):
            SiegelPoint(np.zeros((2, 3)))

    def test_params_validation(self):
        with pytest.raises(NotPositiveDefinite):
            SiegelParams(-np.eye(2), ())
        with pytest.raises(DimensionMismatch):
            SiegelParams(np.eye(2), (np.zeros((3, 3)),))


class TestSiegelPhi:
    def test_examples(self, rng):
        Z, W = random_siegel(rng, 3), random_siegel(rng, 3)
        np.testing.assert_allclose(siegel_phi(Z, Z), np.zeros((3, 3)), atol=1e-12)
        np.testing.assert_allclose(siegel_phi(np.zeros((3, 3)), W), W, atol=1e-14)

    def test_scalar_reduction(self, rng):
        for z, w in zip(random_disk(rng, 500), random_disk(rng, 500)):
            phi = siegel_phi([[z]], [[w]])[0, 0]
            assert phi == pytest.approx(mobius(z, w), abs=1e-12)

    def test_inside_disk(self, rng):
        for _ in range(100):
            phi = siegel_phi(random_siegel(rng, 3, 0.99), random_siegel(rng, 3, 0.99))
            assert np.linalg.norm(phi, 2) < 1.0

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatch):
            siegel_phi(np.zeros((2, 2)), np.zeros((3, 3)))


class TestDistances:
    def test_siegel_examples(self, rng):
        Z = random_siegel(rng, 2)
        assert siegel_distance(Z, Z) == pytest.approx(0.0, abs=1e-12)
        assert siegel_distance([[0.0]], [[0.5]]) == pytest.approx(np.log(3.0))

    def test_siegel_scalar_reduction(self, rng):
        for z, w in zip(random_disk(rng, 500), random_disk(rng, 500)):
            expected = poincare_distance(z, w)
            assert siegel_distance([[z]], [[w]]) == pytest.approx(expected, abs=1e-10, rel=1e-10)
            assert siegel_distance([[z]], [[w]], mode='full') == pytest.approx(expected, abs=1e-10, rel=1e-10)

    def test_siegel_symmetry(self, rng):
        for _ in range(100):
            Z1, Z2 = random_siegel(rng, 3), random_siegel(rng, 3)
            for mode in ('spectral', 'full'):
                assert siegel_distance(Z1, Z2, mode) == pytest.approx(siegel_distance(Z2, Z1, mode), abs=1e-10)

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            siegel_distance([[0.0]], [[0.1]], mode='nuclear')

    def test_phi_isometry(self, rng):
        for _ in range(500):
            M, Z1, Z2 = (random_siegel(rng, 2, 0.8) for _ in range(3))
            for mode in ('spectral', 'full'):
                before = siegel_distance(Z1, Z2, mode)
                after = siegel_distance(siegel_phi(M, Z1), siegel_phi(M, Z2), mode)
                assert after == pytest.approx(before, abs=1e-8, rel=1e-8)

    def test_hpd_examples(self, rng):
        R = random_hpd(rng, 3)
        assert hpd_affine_distance(R, R) == pytest.approx(0.0, abs=1e-12)
        assert hpd_affine_distance(np.eye(2), np.e * np.eye(2)) == pytest.approx(np.sqrt(2))
        assert hpd_affine_distance([[1.0]], [[np.e ** 2]]) == pytest.approx(2.0)

    def test_hpd_congruence_invariance(self, rng):
        for _ in range(500):
            R1, R2 = random_hpd(rng, 3), random_hpd(rng, 3)
            G = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            before = hpd_affine_distance(R1, R2)
            after = hpd_affine_distance(G @ R1 @ G.conj().T, G @ R2 @ G.conj().T)
            assert after == pytest.approx(before, abs=1e-8, rel=1e-8)

    def test_block_toeplitz_examples(self, rng):
        P = random_params(rng)
        assert block_toeplitz_distance(P, P) == pytest.approx(0.0, abs=1e-12)
        zeros = (np.zeros((2, 2)), np.zeros((2, 2)))
        P1, P2 = SiegelParams(np.eye(2), zeros), SiegelParams(np.e * np.eye(2), zeros)
        assert block_toeplitz_distance(P1, P2) == pytest.approx(np.sqrt(6))

    def test_block_toeplitz_scalar_reduction(self, rng):
        for _ in range(500):
            x = ProductPoint(rng.normal(), random_disk(rng, 3), 4)
            y = ProductPoint(rng.normal(), random_disk(rng, 3), 4)
            d = block_toeplitz_distance(scalar_params(x.log_p0, x.mu), scalar_params(y.log_p0, y.mu))
            assert d == pytest.approx(product_distance(x, y), abs=1e-10, rel=1e-10)

    def test_block_toeplitz_shape_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            block_toeplitz_distance(random_params(rng, N=3), random_params(rng, N=4))

    def test_metric_axioms(self, rng):
        # full distance tables over 30 samples cover 27000 triples
        siegel_points = [random_siegel(rng, 2) for _ in range(30)]
        hpd_points = [random_hpd(rng, 2) for _ in range(30)]
        params = [random_params(rng) for _ in range(30)]
        tables = {
            'spectral': lambda i, j: siegel_distance(siegel_points[i], siegel_points[j]),
            'full': lambda i, j: siegel_distance(siegel_points[i], siegel_points[j], 'full'),
            'hpd': lambda i, j: hpd_affine_distance(hpd_points[i], hpd_points[j]),
            'block': lambda i, j: block_toeplitz_distance(params[i], params[j]),
        }
        for distance in tables.values():
            D = np.zeros((30, 30))
            for i, j in itertools.combinations(range(30), 2):
                D[i, j] = distance(i, j)
                D[j, i] = distance(j, i)
                assert D[i, j] > 0
            assert_triangle(D)


class TestMatrixMetric:
    def test_zero_perturbation(self, rng):
        P = random_params(rng)
        assert matrix_metric_form(P, np.zeros((2, 2)), [np.zeros((2, 2))] * 2) == pytest.approx(0.0)

    def test_scalar_reduction(self, rng):
        for _ in range(500):
            x = ProductPoint(rng.normal(), random_disk(rng, 3), 4)
            v = TangentVector(rng.normal(), rng.standard_normal(3) + 1j * rng.standard_normal(3))
            P = scalar_params(x.log_p0, x.mu)
            value = matrix_metric_form(P, [[x.p0 * v.d_log_p0]], [[[d]] for d in v.d_mu])
            assert value == pytest.approx(metric_form(x, v), rel=1e-10)

    def test_matches_full_distance(self, rng):
        eps = 1e-4
        for _ in range(30):
            P = random_params(rng)
            dR0 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            dR0 = dR0 + dR0.conj().T
            dA = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in P.A]
            for r_dir, a_dir in ((dR0, [np.zeros((2, 2))] * 2), (np.zeros((2, 2)), dA)):
                lo = SiegelParams(P.R0 - eps * r_dir / 2, tuple(A.Z - eps * d / 2 for A, d in zip(P.A, a_dir)))
                hi = SiegelParams(P.R0 + eps * r_dir / 2, tuple(A.Z + eps * d / 2 for A, d in zip(P.A, a_dir)))
                squared = block_toeplitz_distance(lo, hi, mode='full') ** 2 / eps ** 2
                assert squared == pytest.approx(matrix_metric_form(P, r_dir, a_dir), rel=1e-3)

    def test_spectral_distance_on_rank_one_directions(self, rng):
        eps = 1e-5
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        dA = np.outer(u, w.conj())
        zeros = np.zeros((2, 2))
        P = SiegelParams(np.eye(2), (zeros,))
        Q = SiegelParams(np.eye(2), (eps * dA,))
        squared = block_toeplitz_distance(P, Q) ** 2 / eps ** 2
        assert squared == pytest.approx(matrix_metric_form(P, zeros, [dA]), rel=1e-6)

    def test_shape_mismatch(self, rng):
        P = random_params(rng)
        with pytest.raises(DimensionMismatch):
            matrix_metric_form(P, np.zeros((2, 2)), [np.zeros((2, 2))])


class TestJson:
    def test_round_trip(self, rng):
        P = random_params(rng)
        Q = params_from_json(params_to_json(P))
        np.testing.assert_array_equal(Q.R0, P.R0)
        for a, b in zip(Q.A, P.A):
            np.testing.assert_array_equal(a.Z, b.Z)

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValidationError):
            params_from_json({'R0': [[[1.0, 0.0]]], 'B': []})
        with pytest.raises(ValidationError):
            params_from_json({'A': []})
