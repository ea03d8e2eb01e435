r"""
Exception hierarchy shared by every epitsr module.

The CLI maps each family to an exit code: configuration and usage problems exit
with 1, bad or inconsistent data with 2, numeric aborts with 3.
"""


class EpitError(Exception):
    r"""Base class of every error raised on purpose by epitsr."""

    exit_code = 1


class ConfigError(EpitError, ValueError):
    r"""Invalid configuration value, unknown key or malformed command line."""

    exit_code = 1


class NonScalarLossError(ConfigError):
    pass


class DataError(EpitError, ValueError):
    r"""Input data that cannot be used as given."""

    exit_code = 2


class ShapeMismatchError(DataError):
    pass


class ChannelError(DataError):
    pass


class EmptyValidRegionError(DataError):
    pass


class TextureTooSmallError(DataError):
    pass


class SceneTooSmallError(DataError):
    pass


class MissingViewError(DataError):
    pass


class FormatError(DataError):
    r"""Bad magic, unsupported version, truncated payload or checkpoint mismatch."""


class NumericError(EpitError, ArithmeticError):
    exit_code = 3


class NonFiniteError(NumericError):
    r"""An operation produced NaN or Inf while anomaly detection was enabled."""


class DivergenceError(NumericError):
    r"""Training loss became non-finite."""


class UncheckedGradientError(NumericError):
    r"""No entry of a parameter could be compared without crossing a kink."""
