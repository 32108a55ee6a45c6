"""Base exceptions and shared constants.

All errors raised on purpose by the package derive from ``AhresError``. The
second base class of each error tells the caller what kind of standard
exception it can be treated as.
"""

D_CONVENTION = "D_mu = -i d/dmu"

DEFAULT_MU_LEFT = -0.75
DEFAULT_CHAR_TOL = 1e-9
DEFAULT_CONVERGENCE_TOL = 1e-14
DEFAULT_MAX_TIME = 1e3
DEFAULT_RTOL = 1e-10


class AhresError(Exception):
    """Root of all package specific errors.

    Parameters
    ----------
    message : str
        Human readable description.

    details : dict or None
        JSON serializable context (offending values, condition numbers, ...).

    """

    def __init__(self, message, details=None):
        """Construct."""
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self):
        """Machine parsable representation used by the CLI."""
        return {"error": self.__class__.__name__, "message": self.message, "details": self.details}


class DomainError(AhresError, ValueError):
    """Argument lies outside of the admissible domain."""


class EvaluationError(AhresError, ValueError):
    """A user supplied function produced non-finite samples."""


class ConstructionError(AhresError, ValueError):
    """An object (phase weight, grid) cannot be built with the given parameters."""


class ConfigError(AhresError, ValueError):
    """Configuration violates the schema or a consistency rule.

    Parameters
    ----------
    message : str
        Description of the violation.

    pointer : str
        JSON pointer of the offending entry, e.g. ``/absorption/mu0``.

    """

    def __init__(self, message, pointer="", details=None):
        """Construct."""
        details = dict(details or {})
        details["pointer"] = pointer
        super().__init__(message, details)
        self.pointer = pointer


class BranchError(AhresError, ArithmeticError):
    """Spectrum touches the cut of the principal square root."""


class NumericalError(AhresError, ArithmeticError):
    """Numerical failure of a solver."""


class NearPoleError(NumericalError):
    """Matrix is singular to tolerance, the spectral parameter is close to a pole."""

    def __init__(self, message, rcond, details=None):
        """Construct."""
        details = dict(details or {})
        details["rcond"] = float(rcond)
        super().__init__(message, details)
        self.rcond = rcond


class IntegrationError(NumericalError):
    """Integrator failed, ``last_state`` holds the last valid state."""

    def __init__(self, message, last_state, details=None):
        """Construct."""
        details = dict(details or {})
        details["last_state"] = [float(v) for v in last_state]
        super().__init__(message, details)
        self.last_state = last_state
