#!/usr/bin/env python3
"""
Pipeline configuration file

A single JSON document:

    {
      "seed": 20240611,
      "scenario": {"n_pulses": 16,
                   "classes": [{"name": "A", "p0": 1.0, "mu": [0.1], "n_cells": 200,
                                "texture_shape": 1.0}]},
      "burg":   {"order": "full", "gamma": 0.0},
      "kmeans": {"k": 2, "max_iter": 100, "tol": 1e-6, "init": "random", "restarts": 5},
      "io":     {"output_dir": "results"}
    }

Unknown keys are rejected with their path. Stage seeds are derived from the
master seed with derive_seed(seed, stage) unless given explicitly.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

try:
    from .config import KMEANS_INIT_MODES, KMEANS_MAX_ITER, KMEANS_RESTARTS, KMEANS_TOL, OUTPUT_DIR
    from .errors import ConfigError, ValidationError
    from .simulate import ClassSpec, ScenarioConfig
    from .utils import derive_seed, safe_json_load
except ImportError:
    from config import KMEANS_INIT_MODES, KMEANS_MAX_ITER, KMEANS_RESTARTS, KMEANS_TOL, OUTPUT_DIR
    from errors import ConfigError, ValidationError
    from simulate import ClassSpec, ScenarioConfig
    from utils import derive_seed, safe_json_load

logger = logging.getLogger(__name__)

_TOP_KEYS = {'seed', 'scenario', 'burg', 'kmeans', 'io'}
_SCENARIO_KEYS = {'n_pulses', 'classes'}
_CLASS_KEYS = {'name', 'p0', 'mu', 'n_cells', 'texture_shape'}
_BURG_KEYS = {'order', 'gamma'}
_KMEANS_KEYS = {'k', 'max_iter', 'tol', 'init', 'restarts', 'seed'}
_IO_KEYS = {'output_dir'}


@dataclass(frozen=True)
class BurgConfig:
    order: Union[int, str] = 'full'
    gamma: float = 0.0

    def resolve_order(self, n_pulses: int) -> int:
        order = n_pulses - 1 if self.order == 'full' else int(self.order)
        if order >= n_pulses:
            raise ConfigError(f"burg.order: must be < n_pulses = {n_pulses}, got {order}")
        return order


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    seed: int
    max_iter: int = KMEANS_MAX_ITER
    tol: float = KMEANS_TOL
    init: str = 'random'
    restarts: int = KMEANS_RESTARTS


@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    scenario: ScenarioConfig
    burg: BurgConfig
    kmeans: KMeansConfig
    output_dir: Path

    def to_dict(self) -> Dict[str, Any]:
        """Echo with every derived value spelled out, enough to reproduce the run."""
        return {
            'seed': self.seed,
            'scenario': {
                'seed': self.scenario.seed,
                'n_pulses': self.scenario.n_pulses,
                'classes': [
                    {
                        'name': spec.name,
                        'p0': spec.p0,
                        'mu': [[m.real, m.imag] for m in spec.mu],
                        'n_cells': spec.n_cells,
                        'texture_shape': spec.texture_shape,
                    }
                    for spec in self.scenario.classes
                ],
            },
            'burg': {'order': self.burg.order, 'gamma': self.burg.gamma},
            'kmeans': {
                'k': self.kmeans.k,
                'max_iter': self.kmeans.max_iter,
                'tol': self.kmeans.tol,
                'init': self.kmeans.init,
                'restarts': self.kmeans.restarts,
                'seed': self.kmeans.seed,
            },
            'io': {'output_dir': str(self.output_dir)},
        }


def _section(data: Any, path: str, allowed: set) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")
    return data


def _require(data: Dict[str, Any], key: str, path: str) -> Any:
    if key not in data:
        raise ConfigError(f"{path}: missing key '{key}'")
    return data[key]


def _integer(value: Any, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _coefficient(value: Any, path: str) -> complex:
    """A reflection coefficient given as a real number or an [re, im] pair."""
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(f"{path}: expected [re, im], got {value!r}")
        return complex(_number(value[0], path), _number(value[1], path))
    return complex(_number(value, path))


def _class_spec(data: Any, path: str) -> ClassSpec:
    data = _section(data, path, _CLASS_KEYS)
    mu = _require(data, 'mu', path)
    if not isinstance(mu, list):
        raise ConfigError(f"{path}.mu: expected a list of coefficients")
    texture = data.get('texture_shape')
    return ClassSpec(
        name=str(_require(data, 'name', path)),
        p0=_number(_require(data, 'p0', path), f"{path}.p0"),
        mu=tuple(_coefficient(m, f"{path}.mu[{i}]") for i, m in enumerate(mu)),
        n_cells=_integer(_require(data, 'n_cells', path), f"{path}.n_cells", 1),
        texture_shape=None if texture is None else _number(texture, f"{path}.texture_shape"),
    )


def _scenario(data: Any, seed: int) -> ScenarioConfig:
    data = _section(data, 'scenario', _SCENARIO_KEYS)
    classes = _require(data, 'classes', 'scenario')
    if not isinstance(classes, list) or not classes:
        raise ConfigError("scenario.classes: expected a non-empty list")
    return ScenarioConfig(
        seed=seed,
        n_pulses=_integer(_require(data, 'n_pulses', 'scenario'), 'scenario.n_pulses', 2),
        classes=tuple(_class_spec(c, f"scenario.classes[{i}]") for i, c in enumerate(classes)),
    )


def _burg(data: Any, n_pulses: int) -> BurgConfig:
    data = _section(data, 'burg', _BURG_KEYS)
    order = data.get('order', 'full')
    if order != 'full':
        order = _integer(order, 'burg.order', 0)
        if order >= n_pulses:
            raise ConfigError(f"burg.order: must be < n_pulses = {n_pulses}, got {order}")
    gamma = _number(data.get('gamma', 0.0), 'burg.gamma')
    if gamma < 0:
        raise ConfigError(f"burg.gamma: must be >= 0, got {gamma}")
    return BurgConfig(order=order, gamma=gamma)


def _kmeans(data: Any, master_seed: int) -> KMeansConfig:
    data = _section(data, 'kmeans', _KMEANS_KEYS)
    init = data.get('init', 'random')
    if init not in KMEANS_INIT_MODES:
        raise ConfigError(f"kmeans.init: expected one of {KMEANS_INIT_MODES}, got {init!r}")
    tol = _number(data.get('tol', KMEANS_TOL), 'kmeans.tol')
    if tol < 0:
        raise ConfigError(f"kmeans.tol: must be >= 0, got {tol}")
    seed = data.get('seed')
    return KMeansConfig(
        k=_integer(_require(data, 'k', 'kmeans'), 'kmeans.k', 1),
        seed=derive_seed(master_seed, 'cluster') if seed is None else _integer(seed, 'kmeans.seed', 0),
        max_iter=_integer(data.get('max_iter', KMEANS_MAX_ITER), 'kmeans.max_iter', 1),
        tol=tol,
        init=init,
        restarts=_integer(data.get('restarts', KMEANS_RESTARTS), 'kmeans.restarts', 1),
    )


def parse_pipeline_config(data: Any, seed_override: Optional[int] = None) -> PipelineConfig:
    """
    Validate a decoded configuration document

    Args:
        data: Decoded JSON object
        seed_override: Replaces the master seed (the --seed flag)

    Raises:
        ConfigError: unknown or missing keys, wrong types or invalid values
    """
    data = _section(data, 'config', _TOP_KEYS)
    seed = _integer(_require(data, 'seed', 'config'), 'seed', 0) if seed_override is None else seed_override
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed: must be a 64-bit unsigned integer, got {seed}")
    try:
        scenario = _scenario(_require(data, 'scenario', 'config'), derive_seed(seed, 'simulate'))
    except ValidationError as e:
        raise ConfigError(f"scenario: {e}") from e
    io = _section(data.get('io', {}), 'io', _IO_KEYS)
    return PipelineConfig(
        seed=seed,
        scenario=scenario,
        burg=_burg(data.get('burg', {}), scenario.n_pulses),
        kmeans=_kmeans(_require(data, 'kmeans', 'config'), seed),
        output_dir=Path(io.get('output_dir', OUTPUT_DIR)),
    )


def load_pipeline_config(path: Path, seed_override: Optional[int] = None) -> PipelineConfig:
    """Read and validate a configuration file (MalformedFile on bad JSON)."""
    config = parse_pipeline_config(safe_json_load(Path(path)), seed_override)
    logger.info(f"📋 Loaded configuration {path} (seed {config.seed})")
    return config
