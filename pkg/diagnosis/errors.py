"""Exceptions raised by the diagnosis, simulation and processing packages."""


class AADError(Exception):
    """Base class of every error raised by this project."""


class DimensionMismatch(AADError, ValueError):
    pass


class InvalidProbability(AADError, ValueError):
    pass


class BlockShapeMismatch(AADError, ValueError):
    pass


class ConfigError(AADError, ValueError):
    pass


class FixtureError(AADError, ValueError):
    pass


class ChannelNull(AADError):
    """Channel coefficient too small to divide by on an estimated support."""


class ZeroTruth(AADError):
    """NMSE requested against an all-zero reference."""
