import numpy as np
import pytest

from config import STREAM_TEXTURE
from errors import InvalidCoefficient, InvalidOrder, InvalidShape
from estimate import ReflectionPoint, burg_regularized, covariance_from_reflection
from simulate import Burst, ClassSpec, ScenarioConfig, apply_sirv_texture, ar_gaussian_series, simulate_scenario, stream


def two_classes(seed=1, n_cells=10, texture=None):
    return ScenarioConfig(seed=seed, n_pulses=8, classes=(
        ClassSpec('A', 1.0, (0.1,), n_cells, texture),
        ClassSpec('B', 2.0, (0.9,), n_cells, texture),
    ))


class TestArGaussianSeries:
    def test_white_noise_power(self):
        x = ar_gaussian_series(1.0, [], 100_000, stream(3, 0))
        assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_lag_one_correlation(self):
        # one long series; lag-1 sample correlation against the closed-form covariance
        x = ar_gaussian_series(1.0, [0.9], 100_000, stream(4, 0))
        r = covariance_from_reflection(ReflectionPoint(0.0, [0.9]), 2)
        r1 = np.mean(x[1:] * np.conj(x[:-1]))
        assert r1.real == pytest.approx(r[1, 0].real, abs=0.04)
        assert abs(r1.imag) < 0.04

    def test_deterministic(self):
        a = ar_gaussian_series(1.0, [0.5j], 16, stream(5, 0, 2))
        b = ar_gaussian_series(1.0, [0.5j], 16, stream(5, 0, 2))
        assert np.array_equal(a, b)

    def test_errors(self):
        with pytest.raises(InvalidOrder):
            ar_gaussian_series(1.0, [0.1] * 8, 8, stream(0))
        with pytest.raises(InvalidCoefficient):
            ar_gaussian_series(1.0, [1.0], 8, stream(0))


class TestTexture:
    def test_degenerate_texture(self, rng):
        burst = Burst(rng.standard_normal((4, 50)) + 0j)
        textured = apply_sirv_texture(burst, 1e9, stream(1, 1))
        np.testing.assert_allclose(textured.samples, burst.samples, rtol=1e-3)

    def test_gamma_moments(self):
        burst = Burst(np.ones((1, 100_000), dtype=complex))
        for shape in (1.0, 4.0):
            tau = np.abs(apply_sirv_texture(burst, shape, stream(2, 1, int(shape))).samples[0]) ** 2
            assert np.mean(tau) == pytest.approx(1.0, abs=0.02)
            assert np.var(tau) == pytest.approx(1.0 / shape, rel=0.05)

    def test_invalid_shape(self, rng):
        with pytest.raises(InvalidShape):
            apply_sirv_texture(Burst(np.ones((2, 2))), 0.0, stream(0))

    def test_texture_does_not_change_reflection_coefficients(self):
        plain, _ = simulate_scenario(two_classes(texture=None))
        textured, _ = simulate_scenario(two_classes(texture=0.5))
        for j in range(plain.n_cells):
            np.testing.assert_allclose(burg_regularized(textured.samples[:, j], 7).mu,
                                       burg_regularized(plain.samples[:, j], 7).mu, atol=1e-12)


class TestScenario:
    def test_bookkeeping(self):
        burst, labels = simulate_scenario(two_classes())
        assert burst.samples.shape == (8, 20)
        assert np.bincount(labels).tolist() == [10, 10]

    def test_single_class(self):
        config = ScenarioConfig(seed=0, n_pulses=4, classes=(ClassSpec('only', 1.0, (), 5),))
        _, labels = simulate_scenario(config)
        assert labels.tolist() == [0] * 5

    def test_deterministic(self):
        a, la = simulate_scenario(two_classes(seed=9, texture=1.0))
        b, lb = simulate_scenario(two_classes(seed=9, texture=1.0))
        assert np.array_equal(a.samples, b.samples)
        assert np.array_equal(la, lb)

    def test_seed_changes_output(self):
        a, _ = simulate_scenario(two_classes(seed=1))
        b, _ = simulate_scenario(two_classes(seed=2))
        assert not np.array_equal(a.samples, b.samples)

    def test_power_calibration(self):
        config = ScenarioConfig(seed=11, n_pulses=8, classes=(ClassSpec('A', 2.0, (0.5, -0.3j), 10_000),))
        burst, _ = simulate_scenario(config)
        cell_power = np.mean(np.abs(burst.samples) ** 2, axis=0)
        standard_error = np.std(cell_power) / np.sqrt(cell_power.size)
        assert abs(np.mean(cell_power) - 2.0) < 3 * standard_error

    def test_invalid_class(self):
        with pytest.raises(ValueError):
            ClassSpec('bad', -1.0, (), 3)
        with pytest.raises(InvalidCoefficient):
            ClassSpec('bad', 1.0, (1.5,), 3)

    def test_texture_drawn_per_class_stream(self):
        plain, labels = simulate_scenario(two_classes(seed=4))
        textured, _ = simulate_scenario(two_classes(seed=4, texture=2.0))
        tau = (np.abs(textured.samples[0]) / np.abs(plain.samples[0])) ** 2
        for class_index in (0, 1):
            expected = stream(4, STREAM_TEXTURE, class_index).gamma(2.0, 0.5, size=10)
            np.testing.assert_allclose(np.sort(tau[labels == class_index]), np.sort(expected), rtol=1e-9)
