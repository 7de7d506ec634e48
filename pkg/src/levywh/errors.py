"""Exception hierarchy shared by all modules."""


class LevyWHError(Exception):
    """Base class for every error raised by the engine."""


class ParameterDomain(LevyWHError, ValueError):
    """Model parameters outside their admissible domain."""


class StripViolation(LevyWHError, ValueError):
    """An argument leaves the strip where exponential moments exist."""


class AbscissaViolation(LevyWHError, ValueError):
    """Laplace variable (q or Y) not above the admissible abscissa."""


class TruncationFailure(LevyWHError, RuntimeError):
    """A truncation tolerance could not be met within the node budget."""


class ConvergenceFailure(LevyWHError, RuntimeError):
    """Adaptive refinement did not settle within its budget."""


class UnsupportedPathType(LevyWHError, ValueError):
    """The pricing formula is not valid for the path type of the model."""


class DegenerateContract(LevyWHError, ValueError):
    """Contract has no meaningful value (e.g. default at inception)."""


class EmptySample(LevyWHError, ValueError):
    """Monte Carlo estimate requested from an empty sample."""


class ConfigError(LevyWHError):
    """Base for job-configuration problems; carries the offending field path."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class SemanticError(ConfigError):
    pass
