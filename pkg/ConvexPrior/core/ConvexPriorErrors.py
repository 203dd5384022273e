"""
Exception hierarchy for the convex prior library.
"""


class ConvexPriorError(Exception):
    """Base class for all library errors"""


class InvalidArgumentError(ConvexPriorError, ValueError):
    """Raised when an argument or configuration value is out of its valid range"""


class EmptySetError(ConvexPriorError, ValueError):
    """Raised when a super-level set that must be non-empty is empty"""


class FieldFormatError(InvalidArgumentError):
    """Raised when a CSV or PGM field file is malformed or truncated"""
