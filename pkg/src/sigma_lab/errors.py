"""Exception hierarchy for sigma_lab."""

import os


class SigmaLabError(Exception):
    """Base class for every error raised by this package."""


class RadicandMismatch(SigmaLabError, ValueError):
    pass


class InvalidSpaceError(SigmaLabError, ValueError):
    pass


class SpaceMismatchError(SigmaLabError, ValueError):
    """Two objects that must live on the same finite space do not."""


class HypothesisViolation(SigmaLabError, ValueError):
    """A structural precondition of an operation does not hold."""


class BudgetExceeded(SigmaLabError):
    """An exact enumeration would exceed the configured budget.

    The message always carries a remediation hint.
    """


class DocumentError(SigmaLabError, ValueError):
    """Malformed JSON input document; ``where`` locates the offending field."""

    def __init__(self, message, where=""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


DEFAULT_BUDGET = 2**20


def enumeration_budget():
    """Maximum number of enumerated patterns (env ``SIGMA_LAB_BUDGET``)."""
    raw = os.environ.get("SIGMA_LAB_BUDGET")
    if not raw:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise SigmaLabError(f"SIGMA_LAB_BUDGET must be an integer, got {raw!r}")
    if value < 1:
        raise SigmaLabError("SIGMA_LAB_BUDGET must be positive")
    return value


def atom_limit():
    """Largest atom count searched exactly (log2 of the budget, 20 by default)."""
    return max(1, enumeration_budget().bit_length() - 1)
