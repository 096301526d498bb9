#!/usr/bin/env python3
"""
Labeled synthetic bursts: AR Gaussian clutter with optional SIRV texture

Each class of range cells is described by its power, its reflection
coefficients and an optional Gamma texture shape. Cells are drawn from
independent counter-based (Philox) streams keyed by cell index, so the
result does not depend on generation order.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter
from tqdm import tqdm

try:
    from .config import (AR_BURN_IN_BASE, AR_BURN_IN_PER_ORDER, MU_MAX, STREAM_CELLS,
                         STREAM_SHUFFLE, STREAM_TEXTURE)
    from .errors import InvalidCoefficient, InvalidOrder, InvalidShape, ValidationError
    from .estimate import ReflectionPoint, levinson
except ImportError:
    from config import (AR_BURN_IN_BASE, AR_BURN_IN_PER_ORDER, MU_MAX, STREAM_CELLS,
                        STREAM_SHUFFLE, STREAM_TEXTURE)
    from errors import InvalidCoefficient, InvalidOrder, InvalidShape, ValidationError
    from estimate import ReflectionPoint, levinson

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Burst:
    """Complex samples of one burst, pulses x range cells"""

    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex, copy=True)
        if samples.ndim != 2 or samples.shape[0] < 1 or samples.shape[1] < 1:
            raise InvalidShape(f"burst must be a non-empty pulses x cells matrix, got {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("burst has non-finite samples")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    @property
    def n_pulses(self) -> int:
        return self.samples.shape[0]

    @property
    def n_cells(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class ClassSpec:
    """Simulation parameters of one clutter class"""

    name: str
    p0: float
    mu: Tuple[complex, ...]
    n_cells: int
    texture_shape: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'mu', tuple(complex(m) for m in self.mu))
        if not self.p0 > 0:
            raise ValidationError(f"class {self.name}: p0 must be > 0, got {self.p0}")
        if any(abs(m) > MU_MAX for m in self.mu):
            raise InvalidCoefficient(f"class {self.name}: |mu| must be <= {MU_MAX}")
        if self.texture_shape is not None and not self.texture_shape > 0:
            raise InvalidShape(f"class {self.name}: texture_shape must be > 0, got {self.texture_shape}")
        if self.n_cells < 1:
            raise ValidationError(f"class {self.name}: n_cells must be >= 1, got {self.n_cells}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Seed, burst geometry and classes of a simulated scenario"""

    seed: int
    n_pulses: int
    classes: Tuple[ClassSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, 'classes', tuple(self.classes))
        if not self.classes:
            raise ValidationError("scenario needs at least one class")
        if self.n_pulses < 2:
            raise ValidationError(f"n_pulses must be >= 2, got {self.n_pulses}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def n_cells(self) -> int:
        return sum(spec.n_cells for spec in self.classes)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream identified by (seed, key)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


def burn_in(order: int) -> int:
    return AR_BURN_IN_BASE + AR_BURN_IN_PER_ORDER * order


def ar_gaussian_series(p0: float, mu: Sequence[complex], n_pulses: int,
                       rng: np.random.Generator) -> np.ndarray:
    """
    Stationary circular Gaussian AR draw with power p0

    The reflection coefficients are turned into AR coefficients with
    levinson(); z_t = -sum_k a_k z_{t-k} + sigma w_t is run from a zero state
    and the first 100 + 10 * order samples are discarded.
    """
    mu = np.asarray(mu, dtype=complex).reshape(-1)
    if mu.size >= n_pulses:
        raise InvalidOrder(f"AR order {mu.size} must be < n_pulses = {n_pulses}")
    if mu.size and np.max(np.abs(mu)) >= 1.0:
        raise InvalidCoefficient("reflection coefficients must satisfy |mu| < 1")
    if not p0 > 0:
        raise ValidationError(f"p0 must be > 0, got {p0}")

    model = levinson(ReflectionPoint(np.log(p0), mu))
    total = burn_in(mu.size) + n_pulses
    w = (rng.standard_normal(total) + 1j * rng.standard_normal(total)) / np.sqrt(2.0)
    z = lfilter([np.sqrt(model.sigma2)], np.concatenate([[1.0], model.a]), w)
    return z[-n_pulses:]


def apply_sirv_texture(burst: Burst, texture_shape: float, rng: np.random.Generator) -> Burst:
    """
    Multiply each range cell by sqrt(tau), tau ~ Gamma(nu, 1/nu) (unit mean)

    One texture value per cell, constant over the burst.
    """
    if not texture_shape > 0:
        raise InvalidShape(f"texture_shape must be > 0, got {texture_shape}")
    tau = rng.gamma(texture_shape, 1.0 / texture_shape, size=burst.n_cells)
    return Burst(burst.samples * np.sqrt(tau)[np.newaxis, :])


def simulate_scenario(config: ScenarioConfig, progress: bool = False) -> Tuple[Burst, np.ndarray]:
    """
    Simulate every class, then shuffle cells with a seeded permutation

    Each cell's Gaussian series has its own stream; the SIRV texture of a
    class is drawn from one stream per class, one value per cell in order.

    Returns:
        (burst, labels) where labels[j] is the class index of cell column j
    """
    blocks = []
    labels = []
    cell = 0
    for class_index, spec in enumerate(config.classes):
        columns = []
        for _ in tqdm(range(spec.n_cells), desc=f"Simulating {spec.name}", disable=not progress):
            columns.append(ar_gaussian_series(spec.p0, spec.mu, config.n_pulses,
                                              stream(config.seed, STREAM_CELLS, cell)))
            cell += 1
        block = Burst(np.column_stack(columns))
        if spec.texture_shape is not None:
            block = apply_sirv_texture(block, spec.texture_shape,
                                       stream(config.seed, STREAM_TEXTURE, class_index))
        blocks.append(block.samples)
        labels.append(np.full(spec.n_cells, class_index, dtype=int))
        logger.debug(f"Class {spec.name}: {spec.n_cells} cells simulated")

    samples = np.hstack(blocks)
    labels = np.concatenate(labels)
    order = stream(config.seed, STREAM_SHUFFLE).permutation(samples.shape[1])
    labels = labels[order]
    labels.setflags(write=False)
    return Burst(samples[:, order]), labels
