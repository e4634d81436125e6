"""Exceptions raised by the dispersion library.

Every error derives from ``DispersionError`` so callers (CLI, API) can catch
the whole family in one place. The second base class keeps the usual
built-in category, e.g. ``InvalidArgumentError`` is also a ``ValueError``.
"""


class DispersionError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(DispersionError, ValueError):
    """An argument is outside the operation's domain."""


class ConsistencyError(DispersionError, RuntimeError):
    """Internal state disagrees with itself (e.g. a draw from another configuration)."""


class InfeasibleParametersError(DispersionError, ArithmeticError):
    """No parameter choice satisfies the required inequality."""


class SupportTooLargeError(DispersionError, ValueError):
    """A dense computation would need more support points than allowed."""


class NoEstimateError(DispersionError, ValueError):
    """Not enough data to produce an estimate or report."""


__all__ = [
    "DispersionError",
    "InvalidArgumentError",
    "ConsistencyError",
    "InfeasibleParametersError",
    "SupportTooLargeError",
    "NoEstimateError",
]
