"""Exception types shared across the package."""


class SparseCellError(Exception):
    """Base class for all package errors."""


class ConfigError(SparseCellError):
    """A solver or experiment configuration is invalid."""


class DimensionError(SparseCellError):
    """Array shapes are inconsistent with the network layout."""


class InfeasibleError(SparseCellError):
    """The requested problem has no feasible solution (or none on the given support)."""


class OracleError(SparseCellError):
    """A ground-truth computation could not certify a result."""
