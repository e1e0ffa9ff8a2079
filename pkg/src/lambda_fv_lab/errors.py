"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class QuadratureDivergence(ToolkitError):
    """Adaptive integration could not certify the requested tolerance."""


class SingularEndpoint(ToolkitError):
    """An integrand has no finite limit at an endpoint carrying an atom."""


class OutOfRange(ToolkitError):
    """An index or parameter lies outside its documented domain."""


class AtomAtOne(ToolkitError):
    """The requested diagnostic is undefined for measures with an atom at 1."""


class DivisionNearZero(ToolkitError):
    """A denominator underflowed where a positive value is required."""


class AllCensored(ToolkitError):
    """Every Monte Carlo replicate hit the time horizon; no mean available."""


class RateOverflow(ToolkitError):
    """The configured event or memory budget would be exceeded."""


class GridTooCoarse(ToolkitError):
    """Fewer distinct scales than the diagnostic needs to report a trend."""


class DegenerateCloud(ToolkitError):
    """A point cloud is empty or otherwise unusable for the request."""


class DomainError(ToolkitError):
    """Argument outside the mathematical domain of a special function."""


class WrongInitialization(ToolkitError):
    """A diagnostic requires trajectories started from a specific state."""


class ConfigError(ToolkitError):
    """An experiment configuration failed validation.

    The message names the offending field.
    """


class IoError(ToolkitError):
    """Reading or writing an experiment artifact failed."""


class DegenerateRatesWarning(UserWarning):
    """A simulation stalled because every transition rate vanished."""
