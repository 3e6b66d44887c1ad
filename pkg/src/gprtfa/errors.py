"""Exception types shared across the package."""


class GprtfaError(Exception):
    """Base class for every error this package raises on purpose."""


class FormatError(GprtfaError):
    """File structure is not recognized (bad option line, missing header)."""


class DataError(GprtfaError):
    """File structure is fine but the values in it are unusable."""


class ConfigError(GprtfaError):
    """Inputs are inconsistent with the survey or processing configuration."""


class DegenerateDataError(GprtfaError):
    """Input carries no usable signal, e.g. an all-zero radargram."""
