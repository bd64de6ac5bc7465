"""Exception taxonomy shared across the package."""


class EcoloopError(Exception):
    """Base class for all package errors."""


class ParseError(EcoloopError):
    """Malformed input file (config or series CSV)."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(EcoloopError):
    """A configuration field is out of its allowed range."""

    def __init__(self, field: str, message: str = ""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field


class OrderError(EcoloopError):
    """Observation timesteps must be strictly increasing."""


class BinMismatchError(EcoloopError):
    """Histograms with different bin edges cannot be compared."""


class TooShortError(EcoloopError):
    """Series too short to build the requested lag windows."""


class EmptyTrainingSetError(EcoloopError):
    """Training requires at least one supervised pair."""


class NumericalError(EcoloopError):
    """Training produced a non-finite loss or parameters."""


class NonFiniteError(EcoloopError):
    """Prediction produced a non-finite value."""


class DegenerateError(EcoloopError):
    """Accuracy metric undefined (zero variance in true values)."""


class NoAlternativeError(EcoloopError):
    """Exploit selection needs at least one non-active model."""


class InsufficientDataError(EcoloopError):
    """Not enough recent readings to retrain."""


class UnknownModelError(EcoloopError):
    """Referenced model id is not in the repository."""


class UnknownVersionError(EcoloopError):
    """Referenced version id is not in the versioned repository."""


class SegmentError(EcoloopError):
    """Drift segment specification is invalid."""


class NegativeFlowError(EcoloopError):
    """Flow readings must be nonnegative."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
