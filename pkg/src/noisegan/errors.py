"""Exception types shared across the package.

Plain ``ValueError`` is used for bad arguments (ranges, shapes, stale
caches).  The two classes below exist so the CLI can map failure kinds
to distinct exit codes.
"""


class DataError(ValueError):
    """Malformed input data: unparseable CSV rows, invalid mass tables."""


class NumericError(ArithmeticError):
    """Numeric failure: overflow during training, quadrature that will not converge."""
