"""Exception hierarchy shared by all modules."""


class VNError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(VNError, ValueError):
    """Operands have incompatible shapes."""


class NotHermitianError(VNError, ValueError):
    """A matrix required to be Hermitian is not, within tolerance."""


class NotDensityMatrixError(VNError, ValueError):
    """A matrix fails the positivity or unit-trace gate."""


class ConvergenceError(VNError, RuntimeError):
    """An iterative routine did not converge."""


class PreconditionError(VNError, ValueError):
    """An operation was called with inputs that violate its preconditions.

    ``check`` names the failed check so callers (and the CLI) can report it.
    """

    def __init__(self, message, check=None):
        super().__init__(message)
        self.check = check


class ConsistencyError(VNError, RuntimeError):
    """An internal identity failed; this points at an arithmetic bug."""


class BlowUpError(VNError, RuntimeError):
    """Numerical integration produced runaway entries."""


class MatrixFormatError(VNError, ValueError):
    """Malformed matrix JSON."""
