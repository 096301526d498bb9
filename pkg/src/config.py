# Configuration for the radar clutter information-geometry toolkit
# Numerical tolerances, algorithm defaults, logging and user messages.
# Run-specific settings (scenario, Burg, k-means, paths) come from the JSON
# run configuration parsed in run_config.py.

from pathlib import Path
import logging
import math

# =============================================================================
# HERMITIAN / HPD KERNEL
# =============================================================================

# Relative tolerance on ||H - H^+||_F / ||H||_F
HERMITIAN_TOL = 1e-10

# Eigenvalue floor (relative to lambda_max) applied only when regularize=True
EIG_REGULARIZE_FLOOR = 1e-14

# =============================================================================
# REFLECTION COEFFICIENTS AND DISK GEOMETRY
# =============================================================================

# |mu| is clamped to this radius (phase preserved)
MU_MAX = 1.0 - 1e-9

# Siegel points need 1 - ||Z||_2 > SIEGEL_MARGIN
SIEGEL_MARGIN = 1e-12

# I - Z^+ W is treated as singular above this condition number
PIVOT_CONDITION_MAX = 1e14

# Imaginary residue accepted on traces that must be real
TRACE_IMAG_TOL = 1e-12

# Toeplitz structure check, relative to |r_0|
TOEPLITZ_TOL = 1e-10

# =============================================================================
# SIMULATION
# =============================================================================

# Warm-up samples discarded before keeping n_pulses: BASE + PER_ORDER * order
AR_BURN_IN_BASE = 100
AR_BURN_IN_PER_ORDER = 10

# Stream families of the scenario generator (spawn keys)
STREAM_CELLS = 0
STREAM_TEXTURE = 1
STREAM_SHUFFLE = 2

# =============================================================================
# BARYCENTERS AND CLUSTERING
# =============================================================================

KARCHER_TOL = 1e-9
KARCHER_MAX_ITER = 1000
KARCHER_INITIAL_STEP = 1.0
KARCHER_MIN_STEP = 1e-12

# Median iterate this close to a data point triggers the anchor test
MEDIAN_ANCHOR_RADIUS = 1e-12

KMEANS_TOL = 1e-6
KMEANS_MAX_ITER = 100
KMEANS_RESTARTS = 1
KMEANS_INIT_MODES = ('random', 'pp')

# Monotonicity slack on the recorded inertia trace
INERTIA_SLACK = 1e-7

# =============================================================================
# EVALUATION AND SPECTRA
# =============================================================================

# Exhaustive permutation search bound (10! = 3628800 permutations)
MAX_PERMUTATION_CLUSTERS = 10

DEFAULT_N_FREQ = 512

# Constant term of the entropy: log(pi * e)
LOG_PI_E = 1.0 + math.log(math.pi)

# =============================================================================
# PATHS AND FILE FORMATS
# =============================================================================

PROJECT_ROOT = Path(__file__).parent.parent
OUTPUT_DIR = PROJECT_ROOT / "results"

BURST_HEADER_PREFIX = "# pulses="
BURST_FLOAT_FORMAT = "%.17g"

# Artifact names written by the pipeline command inside io.output_dir
ARTIFACT_NAMES = {
    'burst': "burst.csv",
    'truth': "truth.json",
    'points': "points.jsonl",
    'model': "model.json",
    'report': "run_report.json",
    'spectrum': "median_spectrum.csv",
}

MESSAGES = {
    'stage_start': "🎯 Stage {}",
    'stage_done': "✅ Stage {} done in {:.2f}s",
    'stage_failed': "❌ Stage {} failed: {}",
    'artifact_written': "📁 Written {} ({})",
    'no_convergence': "⚠️ Barycenter did not converge (grad norm {:.3e} after {} iterations), using best iterate",
    'empty_cluster': "⚠️ Cluster {} empty, reseeded at point {}",
}

# CLI exit codes per error category
EXIT_CODES = {
    'ok': 0,
    'config': 2,
    'file': 3,
    'numeric': 4,
}

# =============================================================================
# LOGGING CONFIGURATION
# =============================================================================

LOG_LEVEL = logging.INFO
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def validate_configuration():
    """
    Check the constants above against each other

    Returns:
        (all checks passed, {check name: passed})
    """
    checks = {
        "mu_max_inside_disk": 0.9 < MU_MAX < 1.0,
        "hermitian_tol_below_toeplitz_tol": 0 < HERMITIAN_TOL <= TOEPLITZ_TOL,
        "karcher_step_range": 0 < KARCHER_MIN_STEP < KARCHER_INITIAL_STEP,
        "karcher_tol_above_step_floor": KARCHER_MIN_STEP < KARCHER_TOL < 1e-3,
        "anchor_radius_below_karcher_tol": 0 < MEDIAN_ANCHOR_RADIUS <= KARCHER_TOL,
        "inertia_slack_below_kmeans_tol": 0 < INERTIA_SLACK < KMEANS_TOL < 1.0,
        "stream_families_distinct": len({STREAM_CELLS, STREAM_TEXTURE, STREAM_SHUFFLE}) == 3,
        "permutation_search_bounded": math.factorial(MAX_PERMUTATION_CLUSTERS) <= 10 ** 7,
        "spectrum_has_bins": DEFAULT_N_FREQ >= 2,
        "artifact_names_distinct": len(set(ARTIFACT_NAMES.values())) == len(ARTIFACT_NAMES),
        "exit_codes_distinct": EXIT_CODES['ok'] == 0 and len(set(EXIT_CODES.values())) == len(EXIT_CODES),
    }
    return all(checks.values()), checks


if __name__ == "__main__":
    is_valid, results = validate_configuration()
    if is_valid:
        print(f"✅ {len(results)} configuration checks passed")
    else:
        print("❌ Configuration checks failed:")
        for check, passed in results.items():
            if not passed:
                print(f"   • {check}")
