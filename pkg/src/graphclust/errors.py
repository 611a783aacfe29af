"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, data errors
exit 2, internal invariant violations exit 3.
"""

from __future__ import annotations


class GraphClustError(Exception):
    """Base class for all package errors."""


class UsageError(GraphClustError):
    """Invalid parameters or invalid combination of options."""


class DataError(GraphClustError):
    """Input data that cannot be parsed or fails validation."""


class BalanceError(DataError):
    """A balanced partition is infeasible for the given instance."""


class InternalError(GraphClustError):
    """An internal invariant was violated; indicates a bug."""
