"""Exception and warning types shared across the package."""


class HicuError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HicuError):
    """A configuration value is out of range or inconsistent.

    Maps to CLI exit code 2.
    """


class DimensionError(HicuError):
    """Array shapes or sizes do not satisfy an operator's contract."""


class DegenerateInputError(HicuError):
    """An input is numerically degenerate (e.g. rank-deficient basis)."""


class DenoiserError(HicuError):
    """An external denoiser failed to start, answer, or keep the protocol.

    Maps to CLI exit code 3.
    """


class FileFormatError(HicuError):
    """A binary file does not match its declared format.

    Maps to CLI exit code 4.
    """


class DegenerateDirectionWarning(UserWarning):
    """A line search was asked to step along a direction of zero energy."""
