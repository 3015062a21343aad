"""Exception types shared across the toolkit.

Each exception carries the CLI exit code its category maps to:
2 = usage/validation, 3 = file format, 4 = numeric/lost-track.
"""


class GestureKitError(Exception):
    exit_code = 1


class InvalidInputError(GestureKitError, ValueError):
    """Precondition violation: bad shapes, ranges, or arguments."""

    exit_code = 2


class FormatError(GestureKitError, ValueError):
    """Malformed file content (PNM, IDX, or model files)."""

    exit_code = 3


class EmptyRegionError(GestureKitError):
    """An operation needing mass (M00 > 0) saw an empty region."""

    exit_code = 4


class LostTrackError(EmptyRegionError):
    """The tracked window ran out of probability mass."""

    exit_code = 4


class NumericError(GestureKitError):
    """Non-finite values where finite ones are required."""

    exit_code = 4


class DegenerateFusionError(NumericError):
    """Elementwise product of two probability vectors is identically zero."""

    exit_code = 4


class UnsupportedConfigError(InvalidInputError):
    """Operation requires a configuration the model does not have."""

    exit_code = 2
