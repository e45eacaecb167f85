"""Exception hierarchy.

Every error carries a short machine-readable ``category`` which the command
line driver prints and maps onto its exit code.
"""


class UltraweakError(Exception):
    category = "error"


class InvalidOrderError(UltraweakError, ValueError):
    category = "invalid-order"


class DegenerateSpaceError(UltraweakError, ValueError):
    category = "degenerate-space"


class DomainError(UltraweakError, ValueError):
    category = "domain"


class UnsupportedDerivativeError(UltraweakError, ValueError):
    category = "unsupported-derivative"


class IncompleteBundleError(UltraweakError, ValueError):
    category = "incomplete-bundle"


class ShapeError(UltraweakError, ValueError):
    category = "shape"


class FactorizationError(UltraweakError, ArithmeticError):
    """Raised when a direct factorization breaks down.

    ``pivot`` is the (zero-based) index of the offending pivot when known,
    ``step`` the time step at which a time stepper failed.
    """

    category = "factorization"

    def __init__(self, message, pivot=None, step=None):
        super().__init__(message)
        self.pivot = pivot
        self.step = step


class SymmetryError(UltraweakError, ValueError):
    category = "symmetry"


class DefinitenessError(UltraweakError, ArithmeticError):
    category = "definiteness"


class StabilityError(UltraweakError, ArithmeticError):
    """Galerkin system could not be solved; ``eps_delta`` holds the measured distance."""

    category = "stability"

    def __init__(self, message, eps_delta=None):
        super().__init__(message)
        self.eps_delta = eps_delta


class ConfigError(UltraweakError, ValueError):
    category = "config"


EXIT_CODES = {
    "error": 1,
    "config": 2,
    "invalid-order": 3,
    "degenerate-space": 3,
    "domain": 3,
    "unsupported-derivative": 3,
    "incomplete-bundle": 4,
    "shape": 4,
    "factorization": 5,
    "symmetry": 6,
    "definiteness": 6,
    "stability": 7,
    "io": 8,
}
