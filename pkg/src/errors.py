#!/usr/bin/env python3
"""
Exception hierarchy for the radar clutter geometry toolkit

Every error carries a category used by the CLI to choose its exit code:
'config' (2), 'file' (3), 'numeric' (4).
"""


class RadarGeometryError(Exception):
    """Base class of all toolkit errors"""

    category = 'numeric'


# =============================================================================
# INPUT VALIDATION
# =============================================================================

class ValidationError(RadarGeometryError, ValueError):
    """An argument violates a documented precondition"""


class NotHermitian(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class InvalidOrder(ValidationError):
    pass


class InvalidCoefficient(ValidationError):
    pass


class InvalidShape(ValidationError):
    pass


class EmptySeries(ValidationError):
    pass


class OrderTooLarge(ValidationError):
    pass


class ZeroSignal(ValidationError):
    pass


class NotToeplitz(ValidationError):
    pass


class SingularBlock(ValidationError):
    pass


class OutsideDisk(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class SingularPivot(ValidationError):
    pass


class TooFewPoints(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class InvalidPermutation(ValidationError):
    pass


class TooManyClusters(ValidationError):
    pass


# =============================================================================
# ITERATIVE SOLVERS
# =============================================================================

class NoConvergence(RadarGeometryError):
    """Gradient flow hit max_iter; `best` holds the best iterate reached"""

    def __init__(self, message, best=None, grad_norm=float('nan'), n_iter=0):
        super().__init__(message)
        self.best = best
        self.grad_norm = grad_norm
        self.n_iter = n_iter


# =============================================================================
# FILES, CONFIGURATION AND PIPELINE STAGES
# =============================================================================

class ConfigError(RadarGeometryError, ValueError):
    category = 'config'


class MalformedFile(RadarGeometryError, ValueError):
    category = 'file'

    def __init__(self, message, path=None, line=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line
        self.column = column


class NonFiniteValue(MalformedFile):
    pass


class StageError(RadarGeometryError):
    """Wraps any failure inside a pipeline stage with the stage name"""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
        self.category = getattr(cause, 'category', 'numeric')


class ArtifactWriteError(RadarGeometryError):
    """An output artifact could not be written"""

    category = 'file'
