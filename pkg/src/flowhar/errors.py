"""Exception hierarchy shared across the library."""


class FlowError(Exception):
    """Base class for all library errors."""


class ConfigError(FlowError):
    """Invalid configuration value or combination."""


class InvalidInputError(FlowError, ValueError):
    """An operation received arguments outside its contract."""


class DegenerateInitError(InvalidInputError):
    """Accelerometer and magnetometer are too close to parallel to fix a frame."""


class SchemaError(ConfigError):
    """A view schema cannot be built for the requested channel layout."""


class DataError(FlowError):
    """Problems with on-disk recordings or dataset descriptions."""


class ParseError(DataError):
    """Malformed row in a recording file.  Carries the 1-based line number."""

    def __init__(self, message, line_no=None):
        super().__init__(message)
        self.line_no = line_no


class SpecMismatchError(DataError):
    """File columns do not match the dataset description."""


class InsufficientDataError(DataError):
    """Recording too short for the requested processing."""


class ChannelUnusableError(DataError):
    """A sensor channel contains no valid samples at all."""
