"""Exception types shared across the package."""


class CurveInputError(ValueError):
    """Malformed or out-of-contract input (maps to CLI exit code 2)."""


class ParseError(CurveInputError):
    """A curve file could not be parsed; carries the offending row."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class DegenerateGeometryError(ValueError):
    """The requested invariant or signature does not exist for this curve."""


class PartitionError(DegenerateGeometryError):
    """The equi-affine partition could not produce enough segments."""


class VerificationError(AssertionError):
    """A self-check in the verification battery failed."""
