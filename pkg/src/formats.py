#!/usr/bin/env python3
"""
On-disk formats of the pipeline artifacts

Burst CSV: optional first line "# pulses=<n>", then one line per range cell
holding 2n floats re(z_0), im(z_0), ..., re(z_{n-1}), im(z_{n-1}). Floats are
written with 17 significant digits so finite values survive a round trip
bit for bit.

Points JSON lines: one {"log_p0", "mu": [[re, im], ...], "n_pulses"} object
per cell. Labels, truth and models are plain JSON documents; spectra are CSV
tables with a frequency column.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

try:
    from .config import BURST_FLOAT_FORMAT, BURST_HEADER_PREFIX
    from .errors import MalformedFile, NonFiniteValue, ValidationError
    from .poincare import ProductPoint
    from .simulate import Burst
    from .utils import safe_json_load
except ImportError:
    from config import BURST_FLOAT_FORMAT, BURST_HEADER_PREFIX
    from errors import MalformedFile, NonFiniteValue, ValidationError
    from poincare import ProductPoint
    from simulate import Burst
    from utils import safe_json_load

logger = logging.getLogger(__name__)

_POINT_KEYS = {'log_p0', 'mu', 'n_pulses'}


# =============================================================================
# BURST CSV
# =============================================================================

def _burst_layout(path: Path):
    """(header line count, pulses) from the first lines of a burst file."""
    with open(path, 'r', encoding='utf-8') as f:
        first = f.readline()
        if first.startswith(BURST_HEADER_PREFIX):
            value = first[len(BURST_HEADER_PREFIX):].strip()
            try:
                n_pulses = int(value)
            except ValueError:
                raise MalformedFile(f"bad pulse count {value!r} in header", path=path, line=1) from None
            if n_pulses < 1:
                raise MalformedFile(f"pulse count must be >= 1, got {n_pulses}", path=path, line=1)
            return 1, n_pulses
        if first.startswith('#'):
            raise MalformedFile(f"unrecognized header, expected '{BURST_HEADER_PREFIX}<n>'", path=path, line=1)
        if not first.strip():
            raise MalformedFile("empty burst file", path=path, line=1)
        fields = first.rstrip('\r\n').count(',') + 1
        if fields % 2:
            raise MalformedFile(f"odd field count {fields}, expected re/im pairs", path=path, line=1)
        return 0, fields // 2


def read_burst(path: Path) -> Burst:
    """
    Read a burst CSV file

    Raises:
        MalformedFile: wrong field counts or unparsable numbers (with line/column)
        NonFiniteValue: nan or inf samples
    """
    path = Path(path)
    if not path.exists():
        raise MalformedFile("file not found", path=path)
    skip, n_pulses = _burst_layout(path)
    n_fields = 2 * n_pulses

    try:
        table = pd.read_csv(path, header=None, skiprows=skip, dtype=str, keep_default_na=False,
                            skip_blank_lines=True, engine='c')
    except pd.errors.EmptyDataError:
        raise MalformedFile("no range cells in burst file", path=path) from None
    except pd.errors.ParserError as e:
        # the parser names the offending line
        raise MalformedFile(f"wrong field count ({e}); expected {n_fields} fields", path=path) from e
    if table.empty:
        raise MalformedFile("no range cells in burst file", path=path)
    if table.shape[1] != n_fields:
        raise MalformedFile(f"expected {n_fields} fields, found {table.shape[1]}", path=path, line=skip + 1)

    # short rows come back padded with NaN
    short = table.isna().any(axis=1).to_numpy()
    if short.any():
        row = int(np.flatnonzero(short)[0])
        found = int(table.iloc[row].notna().sum())
        raise MalformedFile(f"expected {n_fields} fields, found {found}", path=path, line=row + 1 + skip)

    try:
        values = table.astype(float).to_numpy()
    except ValueError:
        parsed = table.apply(pd.to_numeric, errors='coerce')
        literal_nan = table.apply(lambda col: col.str.strip().str.lower().isin(['nan', '+nan', '-nan']))
        bad = (parsed.isna() & ~literal_nan).to_numpy()
        row, column = (int(i) for i in np.argwhere(bad)[0])
        raise MalformedFile(f"not a number: {table.iat[row, column]!r}", path=path,
                            line=row + 1 + skip, column=column + 1) from None

    if not np.all(np.isfinite(values)):
        row, column = (int(i) for i in np.argwhere(~np.isfinite(values))[0])
        raise NonFiniteValue(f"non-finite sample {values[row, column]}", path=path,
                             line=row + 1 + skip, column=column + 1)

    cells = values[:, 0::2] + 1j * values[:, 1::2]
    logger.debug(f"Read burst {path}: {n_pulses} pulses x {cells.shape[0]} cells")
    return Burst(cells.T)


def write_burst(burst: Burst, path: Path) -> None:
    """Write a burst CSV file with a pulse-count header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    samples = burst.samples.T
    interleaved = np.empty((samples.shape[0], 2 * samples.shape[1]))
    interleaved[:, 0::2] = samples.real
    interleaved[:, 1::2] = samples.imag
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(f"{BURST_HEADER_PREFIX}{burst.n_pulses}\n")
        pd.DataFrame(interleaved).to_csv(f, header=False, index=False,
                                         float_format=BURST_FLOAT_FORMAT, lineterminator='\n')


# =============================================================================
# POINTS JSON LINES
# =============================================================================

def point_from_dict(data: dict) -> ProductPoint:
    if not isinstance(data, dict):
        raise ValidationError("expected a JSON object")
    missing = _POINT_KEYS - set(data)
    unknown = set(data) - _POINT_KEYS
    if missing or unknown:
        raise ValidationError(f"keys must be {sorted(_POINT_KEYS)} (missing {sorted(missing)}, "
                              f"unknown {sorted(unknown)})")
    mu = np.asarray(data['mu'], dtype=float)
    if mu.size == 0:
        mu = mu.reshape(0, 2)
    if mu.ndim != 2 or mu.shape[1] != 2:
        raise ValidationError("mu must be a list of [re, im] pairs")
    if isinstance(data['n_pulses'], bool) or not isinstance(data['n_pulses'], int):
        raise ValidationError("n_pulses must be an integer")
    return ProductPoint(data['log_p0'], mu[:, 0] + 1j * mu[:, 1], data['n_pulses'])


def read_points(path: Path) -> List[ProductPoint]:
    """Read a points file; blank lines are skipped."""
    path = Path(path)
    if not path.exists():
        raise MalformedFile("file not found", path=path)
    points = []
    with open(path, 'r', encoding='utf-8') as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                points.append(point_from_dict(json.loads(line)))
            except json.JSONDecodeError as e:
                raise MalformedFile(f"JSON error: {e.msg}", path=path, line=number, column=e.colno) from e
            except (ValidationError, TypeError, ValueError) as e:
                raise MalformedFile(str(e), path=path, line=number) from e
    if not points:
        raise MalformedFile("no points in file", path=path)
    return points


def write_points(points: Sequence[ProductPoint], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for point in points:
            f.write(json.dumps(point.to_dict()) + "\n")


# =============================================================================
# LABELS AND SPECTRA
# =============================================================================

def read_labels(path: Path) -> np.ndarray:
    """
    Labels from a JSON list or an object with a "labels" entry

    Both truth files and cluster models qualify.
    """
    path = Path(path)
    data = safe_json_load(path)
    if isinstance(data, dict):
        if 'labels' not in data:
            raise MalformedFile("no 'labels' entry", path=path)
        data = data['labels']
    if not isinstance(data, list) or not data:
        raise MalformedFile("labels must be a non-empty list", path=path)
    if any(isinstance(v, bool) or not isinstance(v, int) or v < 0 for v in data):
        raise MalformedFile("labels must be non-negative integers", path=path)
    return np.asarray(data, dtype=int)


def truth_document(labels, class_names: Optional[Sequence[str]] = None) -> dict:
    document = {'labels': [int(label) for label in labels]}
    if class_names is not None:
        document['classes'] = list(class_names)
    return document


def spectrum_table(frequencies: np.ndarray, columns: Dict[str, np.ndarray]) -> pd.DataFrame:
    table = pd.DataFrame({'frequency': frequencies})
    for name, power in columns.items():
        table[name] = power
    return table


def write_spectrum(table: pd.DataFrame, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format=BURST_FLOAT_FORMAT, lineterminator='\n')
