"""Exception types shared across the package."""


class SingtraceError(Exception):
    """Base class for all package-specific errors."""


class RangeError(SingtraceError):
    """An input is outside the representable or supported range."""


class CapabilityError(SingtraceError):
    """A request exceeds what the implementation supports (e.g. too many
    expansion terms)."""


class TraceClassError(SingtraceError):
    """Resolvent power too low for a finite trace (2m must exceed the
    total dimension)."""


class QuadratureError(SingtraceError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, nu=None, z=None):
        super().__init__(message)
        self.nu = nu
        self.z = z


class RootFindError(SingtraceError):
    """A root finder failed; carries the offending mode indices."""

    def __init__(self, message, nu=None, k=None):
        super().__init__(message)
        self.nu = nu
        self.k = k


class IllConditionedFitError(SingtraceError):
    """Least-squares fit rejected because of excessive condition number."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class HypothesisViolation(SingtraceError):
    """A symbol failed one of the expansion-engine admissibility probes."""

    def __init__(self, message, assumption=None):
        super().__init__(message)
        self.assumption = assumption


class ConfigError(SingtraceError):
    """Invalid experiment configuration; message names the offending field."""
