"""Exception types shared across the package."""


class RNWError(Exception):
    """Base class for package errors."""


class GridError(RNWError, ValueError):
    """Invalid grid parameters."""


class GammaPoleError(RNWError, ValueError):
    """Gamma evaluated at a non-positive integer."""


class SpecialFunctionDomainError(RNWError, ValueError):
    """Argument outside the domain of a special function."""


class UnsupportedParameters(RNWError, ValueError):
    """Parameter combination outside the supported families."""


class CertificationError(RNWError):
    """A proven lower bound failed on the grid, signalling a numerical fault."""


class InsufficientData(RNWError, ValueError):
    """Too few usable samples for a fit."""


class ConfigError(RNWError, ValueError):
    """Invalid run configuration."""
