"""Exact construction of extremal points on rational quadrics and measurement
of their approximation exponents."""
from .errors import BudgetExceeded, DomainError
from .qform import QuadraticForm, eval_b, eval_q, psi

__all__ = ["BudgetExceeded", "DomainError", "QuadraticForm", "eval_b", "eval_q", "psi"]
__version__ = "0.1.0"
