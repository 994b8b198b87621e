"""Exception hierarchy shared by every module.

Each domain error carries its class name as the machine-readable error tag
printed by the command line front end.
"""

from __future__ import annotations


class HytwError(Exception):
    """Base class for all domain errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


class SyntaxError_(HytwError):
    """Malformed concrete syntax.  ``pos`` is a character offset when known."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        where = f" at offset {pos}" if pos is not None else ""
        super().__init__(f"{message}{where}")

    @property
    def name(self) -> str:
        return "SyntaxError"


class TypeMismatch(HytwError):
    pass


class UnboundVariable(HytwError):
    pass


class UnboundParameter(HytwError):
    pass


class StepBudgetExceeded(HytwError):
    pass


class NotNormal(HytwError):
    pass


class NonterminationBudget(HytwError):
    pass


class IllFormedFormula(HytwError):
    pass


class NonStandardSubterm(HytwError):
    pass


class WitnessSearchExhausted(HytwError):
    pass


class BudgetExceeded(HytwError):
    pass


class IllegalMove(HytwError):
    pass


class InsufficientHeadroom(HytwError):
    pass


class InvalidInstance(HytwError):
    pass


class RetagObstruction(HytwError):
    """The retagging construction produced a labeling that fails a check.

    ``violations`` lists the failed conclusions so callers can report them.
    """

    def __init__(self, message: str, violations: list[str], candidate=None):
        self.violations = violations
        self.candidate = candidate
        super().__init__(message)
