"""Exception types shared across the package."""


class PoyntingError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(PoyntingError):
    """Invalid configuration value (grid sizes, time step, config keys)."""


class ContractViolationError(PoyntingError):
    """An operation was called with data violating its contract
    (layout mismatch, non-conforming boundary entries, bad test pair)."""


class AdmissibilityError(PoyntingError):
    """A material tensor violates the admissibility conditions
    (negative diagonal entry)."""


class CoercivityError(PoyntingError):
    """A material tensor violates the uniqueness-mode lower bounds."""


class UnsupportedLayoutError(PoyntingError):
    """Material tensors with off-diagonal coupling are parsed and validated
    but cannot be advanced by the steppers."""


class SolverError(PoyntingError):
    """Iterative solver failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None,
                 iterations: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class BlowUpError(PoyntingError):
    """A field value became non-finite during time integration."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class HypothesisViolationError(PoyntingError):
    """Input data violates a theorem hypothesis required by a check
    (e.g. nonzero initial data in the uniqueness experiment)."""
