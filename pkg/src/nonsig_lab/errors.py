class NonsigLabError(Exception):
    """Base class for all errors raised by this package."""


class InputError(NonsigLabError, ValueError):
    """Argument out of range or inconsistent with another argument."""


class ValidationError(NonsigLabError, ValueError):
    """A table or file violates a probability / no-signaling invariant."""


class ResourceError(NonsigLabError):
    """Requested computation exceeds the supported size."""


class UnsupportedFormError(NonsigLabError):
    """Operation needs a correlator-form functional."""


class SolverError(NonsigLabError, RuntimeError):
    """Linear program could not be solved to the required accuracy."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NumericalError(NonsigLabError, ArithmeticError):
    """Iterative method failed to converge."""
