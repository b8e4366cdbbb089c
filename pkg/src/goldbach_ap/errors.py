"""Exception types shared across the package.

The CLI maps these onto exit codes: ``RangeError`` and ``ArgumentError`` exit
with 2, ``AccuracyError`` with 3.
"""


class GapError(Exception):
    """Base class for all package errors."""


class ArgumentError(GapError, ValueError):
    """An argument violates an operation's precondition."""


class RangeError(GapError, ValueError):
    """A requested evaluation point lies outside the sieved table."""


class ResourceError(GapError, MemoryError):
    """A table would exceed the configured memory budget."""


class AccuracyError(GapError, ArithmeticError):
    """A rounding certificate could not be established within tolerance."""
