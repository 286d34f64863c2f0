"""Exception types shared across the package."""


class FloodcastError(Exception):
    """Base class for all package-specific errors."""


class AlignmentError(FloodcastError):
    """Series share no common timestamp range."""


class RangeError(FloodcastError):
    """A flood term lies (partly) outside the series it indexes."""


class InsufficientHistory(FloodcastError):
    """A lag/window transform was asked for more history than exists."""


class ValidationError(FloodcastError):
    """A domain invariant was violated at construction or ingest time."""


class ConfigError(FloodcastError):
    """Invalid or inconsistent experiment configuration."""


class DegenerateInput(FloodcastError):
    """Input is constant / zero-variance where the operation needs spread."""


class ZeroNormError(FloodcastError):
    """A vector with zero l2-norm reached a normalizing denominator."""

    def __init__(self, message, model=None, term_id=None):
        super().__init__(message)
        self.model = model
        self.term_id = term_id


class ShapeError(FloodcastError):
    """Vector/matrix length mismatch."""


class SchemaError(FloodcastError):
    """Prediction input columns do not match the training schema."""


class SolveError(FloodcastError):
    """A linear solve failed (typically singular normal equations)."""


class ConvergenceError(FloodcastError):
    """An iterative solver hit its iteration cap before the tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class TuneError(FloodcastError):
    """Every hyperparameter candidate failed; carries per-candidate notes."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class FormatError(FloodcastError):
    """Structurally invalid input file (bad header, gap in hourly grid...)."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ParseError(FloodcastError):
    """A cell could not be parsed as the expected type."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
