"""Exception hierarchy shared by all modules."""


class BellAsymError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BellAsymError, ValueError):
    """Input violates a documented invariant (probabilities, shapes, ranges)."""


class GameFormatError(ValidationError):
    """Malformed game or strategy file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RangeError(GameFormatError):
    """Index outside the declared setting/outcome range."""


class ShapeError(ValidationError):
    """Array dimensions do not match the game they are used with."""


class CapacityError(BellAsymError):
    """Strategy enumeration would exceed the configured cap."""


class UnsupportedInputError(ValidationError):
    """Operation is only defined for a restricted class of inputs."""


class SolverError(BellAsymError):
    """Linear program failed (pivot cap, singular basis, infeasibility)."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class DegeneracyError(SolverError):
    """Basis became numerically singular; retry with a perturbed right-hand side."""
