"""Exception hierarchy shared across the package.

Two failure families matter to callers (and to the CLI exit codes):
bad inputs or configuration (``ValidationError``) versus numerical
breakdown at runtime (``NumericError``).
"""


class NetinferError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NetinferError, ValueError):
    """Invalid input data, configuration, or argument combination."""


class DataFormatError(ValidationError):
    """Malformed input file (CSV/DOT/JSON); message carries the position."""


class NumericError(NetinferError, ArithmeticError):
    """Numerical failure: degenerate covariance, divergence, df overflow."""
