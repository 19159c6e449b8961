"""Exception types shared across the package."""


class SpinMarketError(Exception):
    """Base class for all package errors."""


class TopologyError(SpinMarketError, ValueError):
    """A lattice builder received dimensions it cannot satisfy."""


class DepletionError(SpinMarketError, ValueError):
    """Link elimination asked for more removals than the in-degree allows."""


class InsufficientDataError(SpinMarketError, ValueError):
    """Too few observations or eligible points for the requested statistic."""


class DegenerateFitError(SpinMarketError, ValueError):
    """The data admit no meaningful fit (zero variance on an axis)."""


class DomainError(SpinMarketError, ValueError):
    """An input lies outside the mathematical domain of the operation."""


class ConfigError(SpinMarketError, ValueError):
    """An experiment configuration is malformed or inconsistent."""
