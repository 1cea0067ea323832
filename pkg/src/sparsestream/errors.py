"""Exception hierarchy.

Two broad families matter to callers: configuration problems (rejected
before any data is touched, CLI exit code 2) and data problems (bad input
files or matrices, CLI exit code 3). Everything else is a programming
error and raises the specific class directly.
"""


class SparseStreamError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SparseStreamError, ValueError):
    """A configuration value violates its contract."""


class DataError(SparseStreamError, ValueError):
    """Input data violates a precondition."""


class InvalidInput(DataError):
    """A matrix contains NaN/Inf or has inconsistent dimensions."""


class FactorizationFailure(SparseStreamError):
    """The (I + X'X) system could not be factorized; indicates NaN/Inf
    contamination since the matrix is symmetric positive definite."""


class DegenerateAffinity(SparseStreamError):
    """Affinity matrix carries no connectivity information (all zeros)."""


class ZeroResidual(SparseStreamError):
    """Residual vector has no entry above the numeric-zero floor."""


class EmptyCluster(SparseStreamError):
    """A cluster index refers to a cluster with no members."""


class SameCluster(SparseStreamError):
    """A cross-cluster quantity was requested for a cluster against itself."""


class LengthMismatch(DataError):
    """Paired label/assignment sequences have different lengths."""


class NotNormalized(DataError):
    """Matrix entries fall outside [0, 1] where normalized input is required."""


class EmptyTrain(DataError):
    """Nearest-neighbour reference set is empty."""


class InsufficientData(DataError):
    """Not enough windows/objects to run the requested experiment."""


class InvalidGeometry(ConfigError):
    """Synthetic-stream geometry is unsatisfiable (e.g. k*r > d)."""


class ParseError(DataError):
    """A CSV cell could not be parsed; carries row/column position."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class RaggedRows(DataError):
    """CSV rows have inconsistent field counts."""


class IoError(SparseStreamError):
    """Wraps an OS-level failure while reading or writing result files."""


class StreamError(SparseStreamError):
    """A per-window failure, annotated with the window index."""

    def __init__(self, window_index, cause):
        super().__init__(f"window {window_index}: {cause}")
        self.window_index = window_index
        self.cause = cause
