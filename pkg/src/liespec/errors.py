"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class LieSpecError(Exception):
    exit_code = 1


class ShapeMismatch(LieSpecError, ValueError):
    pass


class BackendMismatch(LieSpecError, TypeError):
    pass


class NonFiniteEntry(LieSpecError, ValueError):
    pass


class ConvergenceFailure(LieSpecError, ArithmeticError):
    pass


class MalformedInput(LieSpecError, ValueError):
    pass


class NotIndependent(LieSpecError, ValueError):
    pass


class NotClosed(LieSpecError, ValueError):
    exit_code = 2


class NotSolvable(LieSpecError, ValueError):
    exit_code = 3


class IncompleteCandidates(LieSpecError, RuntimeError):
    exit_code = 4


class NotACharacter(LieSpecError, ValueError):
    exit_code = 5


class NotCommuting(LieSpecError, ValueError):
    exit_code = 6


class DegreeOutOfRange(LieSpecError, IndexError):
    pass


class ComplexNotChain(LieSpecError, ArithmeticError):
    pass


class NotAnIdeal(LieSpecError, ValueError):
    pass


class NotNilpotent(LieSpecError, ValueError):
    pass


class NumericalFailure(LieSpecError, ArithmeticError):
    pass


class CombinatorialBlowup(LieSpecError, RuntimeError):
    pass
