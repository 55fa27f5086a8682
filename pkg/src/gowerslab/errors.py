"""Shared exception types.

The CLI maps these onto exit codes: bad configs exit 2, cost-cap aborts
exit 3, postcondition failures exit 4.
"""


class CapExceeded(Exception):
    """A computation would exceed its configured cost cap."""


class CoprimalityError(ValueError):
    """A coprime average was requested for non-coprime cardinalities."""


class PostconditionError(AssertionError):
    """An exhaustively checked postcondition failed.

    Raised when a verification that should succeed by theory does not;
    on hypothesis-violating inputs this is a reportable event, otherwise
    it signals a bug.
    """


class ConfigError(ValueError):
    """An experiment config failed schema validation."""
