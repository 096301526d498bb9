#!/usr/bin/env python3
"""
Command-line pipeline: simulate -> estimate -> cluster -> evaluate

    simulate  --config C [--output DIR]        burst.csv + truth.json
    estimate  --input burst.csv --output P     Burg coding, one point per cell
    cluster   --input P --output model.json    metric k-means
    evaluate  --input model.json --truth T --output report.json
    pipeline  --config C [--output DIR]        every stage in process + run_report.json
    spectrum  --input P --output S.csv         Doppler spectrum of the median (or mean) point
    siegel    --input params.json --output D   block-Toeplitz distances and entropies

Every command computes all its results before writing any file; simulate and
pipeline stage their files and move them in together, so a failing run leaves
no partial artifacts. Exit codes: 0 ok, 2 config, 3 file, 4 numeric.
"""

import argparse
import logging
import os
import shutil
import tempfile
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

try:
    from .cluster import kmeans
    from .config import ARTIFACT_NAMES, DEFAULT_N_FREQ, EXIT_CODES, KMEANS_INIT_MODES, MESSAGES
    from .errors import (ArtifactWriteError, ConfigError, MalformedFile, NoConvergence, RadarGeometryError,
                         StageError, ValidationError)
    from .estimate import burg_burst, doppler_frequencies, doppler_spectrum, entropy_matrix, levinson
    from .evaluate import best_permutation_score
    from .formats import (read_burst, read_labels, read_points, spectrum_table, truth_document, write_burst,
                          write_points, write_spectrum)
    from .poincare import ProductPoint, frechet_median, karcher_mean
    from .run_config import BurgConfig, KMeansConfig, PipelineConfig, load_pipeline_config
    from .siegel import SIEGEL_DISTANCE_MODES, block_toeplitz_distance, params_from_json
    from .simulate import simulate_scenario
    from .utils import clean_error_message, derive_seed, get_file_stats, safe_json_load, safe_json_save, setup_logging
except ImportError:
    from cluster import kmeans
    from config import ARTIFACT_NAMES, DEFAULT_N_FREQ, EXIT_CODES, KMEANS_INIT_MODES, MESSAGES
    from errors import (ArtifactWriteError, ConfigError, MalformedFile, NoConvergence, RadarGeometryError,
                         StageError, ValidationError)
    from estimate import burg_burst, doppler_frequencies, doppler_spectrum, entropy_matrix, levinson
    from evaluate import best_permutation_score
    from formats import (read_burst, read_labels, read_points, spectrum_table, truth_document, write_burst,
                         write_points, write_spectrum)
    from poincare import ProductPoint, frechet_median, karcher_mean
    from run_config import BurgConfig, KMeansConfig, PipelineConfig, load_pipeline_config
    from siegel import SIEGEL_DISTANCE_MODES, block_toeplitz_distance, params_from_json
    from simulate import simulate_scenario
    from utils import clean_error_message, derive_seed, get_file_stats, safe_json_load, safe_json_save, setup_logging

logger = logging.getLogger(__name__)

BARYCENTERS = ('median', 'mean')


# =============================================================================
# STAGE PLUMBING
# =============================================================================

def run_stage(name: str, timings: Dict[str, float], fn: Callable, *args, **kwargs) -> Any:
    """Run one stage, time it and tag any failure with the stage name."""
    logger.info(MESSAGES['stage_start'].format(name))
    start = time.perf_counter()
    try:
        result = fn(*args, **kwargs)
    except StageError:
        raise
    except (RadarGeometryError, np.linalg.LinAlgError) as e:
        raise StageError(name, e) from e
    timings[name] = time.perf_counter() - start
    logger.info(MESSAGES['stage_done'].format(name, timings[name]))
    return result


def _written(path: Path) -> str:
    stats = get_file_stats(path)
    size = stats['size_formatted'] if stats.get('exists') else "?"
    logger.info(MESSAGES['artifact_written'].format(path, size))
    return str(path)


def _store_json(data: Any, path: Path) -> None:
    if not safe_json_save(data, path):
        raise ArtifactWriteError(f"could not write {path}")


def _save_json(data: Any, path: Path) -> str:
    _store_json(data, path)
    return _written(path)


@contextmanager
def staged_directory(output_dir: Path) -> Iterator[Path]:
    """
    Scratch directory next to output_dir whose files are moved into
    output_dir only when the block completes; on failure nothing is moved.
    """
    output_dir = Path(output_dir)
    output_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{output_dir.name}.", suffix='.partial', dir=output_dir.parent))
    try:
        yield staging
        output_dir.mkdir(parents=True, exist_ok=True)
        for staged in sorted(staging.iterdir()):
            os.replace(staged, output_dir / staged.name)
            _written(output_dir / staged.name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def _barycenter(points: Sequence[ProductPoint], kind: str, diagnostics: List[dict]) -> ProductPoint:
    """Median or mean of points; the best iterate is kept when the flow stalls."""
    solver = frechet_median if kind == 'median' else karcher_mean
    try:
        return solver(points)
    except NoConvergence as e:
        logger.warning(MESSAGES['no_convergence'].format(e.grad_norm, e.n_iter))
        diagnostics.append({'event': 'no_convergence', 'barycenter': kind, 'grad_norm': float(e.grad_norm)})
        return e.best


def estimate_points(burst, burg: BurgConfig, progress: bool = False) -> List[ProductPoint]:
    order = burg.resolve_order(burst.n_pulses)
    return [ProductPoint.from_reflection(point, burst.n_pulses)
            for point in burg_burst(burst, order, burg.gamma, progress=progress)]


def cluster_points(points: Sequence[ProductPoint], settings: KMeansConfig):
    return kmeans(points, settings.k, seed=settings.seed, max_iter=settings.max_iter, tol=settings.tol,
                  init=settings.init, restarts=settings.restarts)


def cluster_spectra(points: Sequence[ProductPoint], labels, k: int, n_freq: int, kind: str,
                    diagnostics: List[dict]):
    """Doppler spectrum of the barycenter of every non-empty cluster."""
    columns = {}
    for j in range(k):
        members = [points[i] for i in np.flatnonzero(np.asarray(labels) == j)]
        if members:
            columns[f"cluster_{j}"] = doppler_spectrum(levinson(_barycenter(members, kind, diagnostics)), n_freq)
    return spectrum_table(doppler_frequencies(n_freq), columns)


# =============================================================================
# COMMANDS
# =============================================================================

def cmd_simulate(config: PipelineConfig, output_dir: Path, progress: bool = True) -> Dict[str, Any]:
    timings = {}
    burst, labels = run_stage('simulate', timings, simulate_scenario, config.scenario, progress=progress)
    names = [spec.name for spec in config.scenario.classes]

    output_dir = Path(output_dir)
    with staged_directory(output_dir) as staging:
        write_burst(burst, staging / ARTIFACT_NAMES['burst'])
        _store_json(truth_document(labels, names), staging / ARTIFACT_NAMES['truth'])
    artifacts = [str(output_dir / ARTIFACT_NAMES[key]) for key in ('burst', 'truth')]
    return {'success': True, 'stage': 'simulate', 'n_pulses': burst.n_pulses, 'n_cells': burst.n_cells,
            'artifacts': artifacts, 'timings': timings}


def cmd_estimate(input_path: Path, output_path: Path, burg: BurgConfig, progress: bool = True) -> Dict[str, Any]:
    timings = {}
    burst = run_stage('read', timings, read_burst, input_path)
    order = burg.resolve_order(burst.n_pulses)
    points = run_stage('estimate', timings, estimate_points, burst, burg, progress)
    write_points(points, output_path)
    return {'success': True, 'stage': 'estimate', 'n_points': len(points),
            'order': order, 'gamma': burg.gamma,
            'artifacts': [_written(Path(output_path))], 'timings': timings}


def cmd_cluster(input_path: Path, output_path: Path, settings: KMeansConfig) -> Dict[str, Any]:
    timings = {}
    points = run_stage('read', timings, read_points, input_path)
    model = run_stage('cluster', timings, cluster_points, points, settings)
    logger.info(f"📊 k = {model.k}: inertia {model.inertia:.6f} after {model.n_iter} iterations")
    return {'success': True, 'stage': 'cluster', 'inertia': model.inertia, 'n_iter': model.n_iter,
            'artifacts': [_save_json(model.to_dict(), Path(output_path))], 'timings': timings}


def cmd_evaluate(input_path: Path, truth_path: Path, output_path: Path) -> Dict[str, Any]:
    timings = {}
    predicted = run_stage('read_labels', timings, read_labels, input_path)
    truth = run_stage('read_truth', timings, read_labels, truth_path)
    report = run_stage('evaluate', timings, best_permutation_score, truth, predicted)
    logger.info(f"📊 Macro-F1 {report.f1:.4f} with permutation {list(report.permutation)}")
    return {'success': True, 'stage': 'evaluate', 'eval': report.to_dict(),
            'artifacts': [_save_json(report.to_dict(), Path(output_path))], 'timings': timings}


def cmd_spectrum(input_path: Path, output_path: Path, kind: str = 'median',
                 n_freq: int = DEFAULT_N_FREQ) -> Dict[str, Any]:
    timings = {}
    diagnostics = []
    points = run_stage('read', timings, read_points, input_path)
    center = run_stage('barycenter', timings, _barycenter, points, kind, diagnostics)
    power = run_stage('spectrum', timings, lambda: doppler_spectrum(levinson(center), n_freq))
    table = spectrum_table(doppler_frequencies(n_freq), {'power': power})
    write_spectrum(table, output_path)
    return {'success': True, 'stage': 'spectrum', 'barycenter': kind, 'center': center.to_dict(),
            'peak_frequency': float(table['frequency'].iloc[int(np.argmax(power))]),
            'diagnostics': diagnostics, 'artifacts': [_written(Path(output_path))], 'timings': timings}


def siegel_report(entries: Any, mode: str, path: Optional[Path] = None) -> Dict[str, Any]:
    if not isinstance(entries, list) or not entries:
        raise MalformedFile("expected a non-empty JSON list of parameter sets", path=path)
    params = []
    for index, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise MalformedFile(f"entry {index} is not an object", path=path)
        try:
            params.append(params_from_json(entry))
        except ValidationError as e:
            raise MalformedFile(f"entry {index}: {e}", path=path) from e
    size = len(params)
    distances = np.zeros((size, size))
    for i in range(size):
        for j in range(i + 1, size):
            distances[i, j] = distances[j, i] = block_toeplitz_distance(params[i], params[j], mode)
    return {'mode': mode, 'distances': distances.tolist(),
            'entropy': [entropy_matrix(P, P.N) for P in params]}


def cmd_siegel(input_path: Path, output_path: Path, mode: str = 'spectral') -> Dict[str, Any]:
    timings = {}
    entries = run_stage('read', timings, safe_json_load, input_path)
    result = run_stage('siegel', timings, siegel_report, entries, mode, input_path)
    return {'success': True, 'stage': 'siegel', 'n_params': len(result['entropy']),
            'artifacts': [_save_json(result, Path(output_path))], 'timings': timings}


def cmd_pipeline(config: PipelineConfig, output_dir: Path, n_freq: int = DEFAULT_N_FREQ,
                 progress: bool = True) -> Dict[str, Any]:
    """
    Run every stage in process and write all artifacts at the end

    The report echoes the resolved configuration, so rerunning it reproduces
    the labels, centroids and scores exactly (timings aside).
    """
    timings = {}
    diagnostics = []
    burst, truth = run_stage('simulate', timings, simulate_scenario, config.scenario, progress=progress)
    points = run_stage('estimate', timings, estimate_points, burst, config.burg, progress)
    model = run_stage('cluster', timings, cluster_points, points, config.kmeans)
    evaluation = run_stage('evaluate', timings, best_permutation_score, truth, model.labels)
    spectra = run_stage('spectrum', timings, cluster_spectra, points, model.labels, model.k, n_freq,
                        'median', diagnostics)

    output_dir = Path(output_dir)
    names = [spec.name for spec in config.scenario.classes]
    keys = ('burst', 'truth', 'points', 'model', 'spectrum', 'report')
    report = {
        'success': True,
        'config': config.to_dict(),
        'labels': [int(label) for label in model.labels],
        'centroids': [c.to_dict() for c in model.centroids],
        'inertia': model.inertia,
        'n_iter': model.n_iter,
        'converged': model.converged,
        'inertia_trace': list(model.inertia_trace),
        'diagnostics': list(model.diagnostics) + diagnostics,
        'eval': evaluation.to_dict(),
        'artifacts': [str(output_dir / ARTIFACT_NAMES[key]) for key in keys],
        'timings': timings,
    }
    with staged_directory(output_dir) as staging:
        write_burst(burst, staging / ARTIFACT_NAMES['burst'])
        _store_json(truth_document(truth, names), staging / ARTIFACT_NAMES['truth'])
        write_points(points, staging / ARTIFACT_NAMES['points'])
        _store_json(model.to_dict(), staging / ARTIFACT_NAMES['model'])
        write_spectrum(spectra, staging / ARTIFACT_NAMES['spectrum'])
        _store_json(report, staging / ARTIFACT_NAMES['report'])
    logger.info(f"📊 Macro-F1 {evaluation.f1:.4f}, inertia {model.inertia:.6f}")
    return report


# =============================================================================
# ARGUMENT PARSING
# =============================================================================

def _order(value: str):
    if value == 'full':
        return value
    try:
        order = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"order must be an integer or 'full', got {value!r}") from None
    if order < 0:
        raise argparse.ArgumentTypeError(f"order must be >= 0, got {order}")
    return order


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='radar-geometry',
                                     description="Information-geometric clustering of radar range cells")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help="Pipeline configuration (JSON)")
    common.add_argument('--input', type=Path, help="Input artifact")
    common.add_argument('--output', type=Path, help="Output file (directory for simulate/pipeline)")
    common.add_argument('--seed', type=int, help="Master seed, overrides the configuration")
    common.add_argument('--quiet', action='store_true', help="Only log warnings and errors")
    common.add_argument('--log-file', type=Path, help="Also log to this file")

    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('simulate', parents=[common], help="Simulate a labeled burst")

    estimate = commands.add_parser('estimate', parents=[common], help="Burg coding of every range cell")
    estimate.add_argument('--order', type=_order, help="Burg order or 'full' (n_pulses - 1)")
    estimate.add_argument('--gamma', type=float, help="Regularization weight")

    cluster = commands.add_parser('cluster', parents=[common], help="Metric k-means of a points file")
    cluster.add_argument('--k', type=int, help="Number of clusters")
    cluster.add_argument('--max-iter', type=int)
    cluster.add_argument('--tol', type=float)
    cluster.add_argument('--init', choices=KMEANS_INIT_MODES)
    cluster.add_argument('--restarts', type=int)

    evaluate = commands.add_parser('evaluate', parents=[common], help="Score labels against ground truth")
    evaluate.add_argument('--truth', type=Path, required=True, help="Ground-truth labels (JSON)")

    pipeline = commands.add_parser('pipeline', parents=[common], help="Run every stage")
    pipeline.add_argument('--n-freq', type=int, default=DEFAULT_N_FREQ, help="Spectrum frequency bins")

    spectrum = commands.add_parser('spectrum', parents=[common], help="Doppler spectrum of a barycenter")
    spectrum.add_argument('--barycenter', choices=BARYCENTERS, default='median')
    spectrum.add_argument('--n-freq', type=int, default=DEFAULT_N_FREQ, help="Spectrum frequency bins")

    siegel = commands.add_parser('siegel', parents=[common], help="Block-Toeplitz distances and entropies")
    siegel.add_argument('--mode', choices=SIEGEL_DISTANCE_MODES, default='spectral')
    return parser


def _require_paths(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{name}" for name in names if getattr(args, name) is None]
    if missing:
        raise ConfigError(f"{args.command} needs {', '.join(missing)}")


def _pipeline_config(args: argparse.Namespace) -> Optional[PipelineConfig]:
    if args.config is None:
        return None
    return load_pipeline_config(args.config, seed_override=args.seed)


def _burg_settings(args: argparse.Namespace) -> BurgConfig:
    config = _pipeline_config(args)
    base = config.burg if config is not None else BurgConfig()
    order = base.order if args.order is None else args.order
    gamma = base.gamma if args.gamma is None else args.gamma
    if gamma < 0:
        raise ConfigError(f"--gamma must be >= 0, got {gamma}")
    return BurgConfig(order=order, gamma=gamma)


def _kmeans_settings(args: argparse.Namespace) -> KMeansConfig:
    config = _pipeline_config(args)
    if config is not None:
        base = config.kmeans
    else:
        if args.k is None:
            raise ConfigError("cluster needs --k or a --config with a kmeans section")
        base = KMeansConfig(k=args.k, seed=derive_seed(args.seed or 0, 'cluster'))
    settings = {
        'k': args.k, 'max_iter': args.max_iter, 'tol': args.tol,
        'init': args.init, 'restarts': args.restarts,
    }
    values = {name: getattr(base, name) if value is None else value for name, value in settings.items()}
    if values['k'] < 1 or values['max_iter'] < 1 or values['restarts'] < 1 or values['tol'] < 0:
        raise ConfigError("k, max_iter and restarts must be >= 1 and tol >= 0")
    return KMeansConfig(seed=base.seed, **values)


def _positive_bins(n_freq: int) -> int:
    if n_freq < 2:
        raise ConfigError(f"--n-freq must be >= 2, got {n_freq}")
    return n_freq


def dispatch(args: argparse.Namespace) -> Dict[str, Any]:
    progress = not args.quiet
    if args.command in ('simulate', 'pipeline'):
        _require_paths(args, 'config')
        config = load_pipeline_config(args.config, seed_override=args.seed)
        output_dir = args.output if args.output is not None else config.output_dir
        if args.command == 'simulate':
            return cmd_simulate(config, output_dir, progress)
        return cmd_pipeline(config, output_dir, _positive_bins(args.n_freq), progress)
    if args.command == 'estimate':
        _require_paths(args, 'input', 'output')
        return cmd_estimate(args.input, args.output, _burg_settings(args), progress)
    if args.command == 'cluster':
        _require_paths(args, 'input', 'output')
        return cmd_cluster(args.input, args.output, _kmeans_settings(args))
    if args.command == 'evaluate':
        _require_paths(args, 'input', 'output')
        return cmd_evaluate(args.input, args.truth, args.output)
    if args.command == 'spectrum':
        _require_paths(args, 'input', 'output')
        return cmd_spectrum(args.input, args.output, args.barycenter, _positive_bins(args.n_freq))
    _require_paths(args, 'input', 'output')
    return cmd_siegel(args.input, args.output, args.mode)


def _failure(stage: str, category: str, error: Exception) -> Dict[str, Any]:
    message = clean_error_message(error)
    logger.error(MESSAGES['stage_failed'].format(stage, message))
    return {'success': False, 'stage': stage, 'category': category, 'error': message}


def run(argv: Optional[Sequence[str]] = None) -> Tuple[int, Dict[str, Any]]:
    """
    Parse arguments and run one command

    Returns:
        (exit code, stage report); failures give {'success': False, ...}
    """
    args = build_parser().parse_args(argv)
    setup_logging(quiet=args.quiet, log_file=args.log_file)
    try:
        report = dispatch(args)
    except RadarGeometryError as e:
        report = _failure(getattr(e, 'stage', args.command), e.category, e)
        return EXIT_CODES.get(e.category, EXIT_CODES['numeric']), report
    except OSError as e:
        return EXIT_CODES['file'], _failure(args.command, 'file', e)
    return EXIT_CODES['ok'], report


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
