"""Exception types raised by mrrkit."""


class MrrkitError(Exception):
    """Base class for all mrrkit errors."""


class ConfigError(MrrkitError):
    """Invalid experiment configuration (bad value or unknown key)."""


class SurveyWindowError(MrrkitError):
    """A drawn survey time has no alive subjects (misconfigured window)."""


class EstimationError(MrrkitError):
    """Base class for estimation failures."""


class InvalidQuadrupleError(EstimationError):
    """A survey record violates its own constraints (e.g. duration > age)."""


class EmptySurveyError(EstimationError):
    """An estimator was given a survey with no records."""


class SeparationError(EstimationError):
    """Poisson regression cannot identify a slope (all events in one cell)."""


class ConvergenceError(EstimationError):
    """Iterative fit did not converge within the iteration budget."""


class DegenerateDenominatorError(EstimationError):
    """Rate-ratio denominator too close to zero; age is not estimable."""


class PrevalenceRangeError(EstimationError):
    """Prevalence outside the open interval (0, 1) where required."""
