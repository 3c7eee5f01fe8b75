"""Semantic exception hierarchy shared by all cfglab modules."""


class CfgLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CfgLabError, ValueError):
    """Inputs violate a documented precondition (domain/shape/sign)."""


class ConvergenceError(CfgLabError, RuntimeError):
    """An iterative numerical method exhausted its budget before converging."""


class BracketError(CfgLabError, ValueError):
    """A root finder was called on an interval without a sign change."""


class BudgetError(CfgLabError, ValueError):
    """A request exceeds the configured memory/size budget."""


class NumericalError(CfgLabError, FloatingPointError):
    """A computation produced non-finite values (reports where it happened)."""
