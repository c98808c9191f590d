"""Exception types shared across the package."""


class RenyiLDPError(Exception):
    """Base class for all errors raised by this package."""


class BudgetError(RenyiLDPError):
    """An enumeration would exceed the configured word budget."""


class DomainError(RenyiLDPError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(RenyiLDPError, ZeroDivisionError):
    """A Moebius map was evaluated at its pole."""


class SearchError(RenyiLDPError):
    """A root search could not bracket a sign change."""


class DegenerateInputError(RenyiLDPError, ValueError):
    """Input carries zero mass or is otherwise degenerate."""
