"""Exception types shared across the package.

The CLI maps ``DomainError`` to exit status 2 and ``BudgetExceeded`` to 3.
"""


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class NotFound(DomainError):
    """A bounded search finished without a witness."""


class FactorizationNeeded(DomainError):
    pass


class NotCanonical(DomainError):
    pass


class BudgetExceeded(RuntimeError):
    """A precision, digit or search budget ran out."""


class PrecisionExhausted(BudgetExceeded):
    pass


class DigitBudgetExceeded(BudgetExceeded):
    pass


class SeedCheckFailed(DomainError):
    pass
