"""Exception types shared across the package."""


class LevySimError(Exception):
    """Base class for all package errors."""


class DimensionError(LevySimError, ValueError):
    """An array has the wrong length or shape."""


class PairIndexError(LevySimError, IndexError):
    """A pair (i, j) or linear pair index r is out of range."""


class MatrixError(LevySimError, ValueError):
    """A matrix is not symmetric / not PSD within tolerance, or is singular."""


class ParameterError(LevySimError, ValueError):
    """A scalar parameter is outside its admissible range."""
