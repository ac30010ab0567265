"""Exception hierarchy for the charp library.

Every module raises subclasses of CharpError so the CLI can map failures
to stable report names.  Honest-failure outcomes (a solver giving up inside
its documented bounds) use SolveFailed / Unknown-style verdicts rather than
generic exceptions.
"""


class CharpError(Exception):
    """Base class for all library errors."""


class ZeroDenominator(CharpError):
    pass


class DivisionByZero(CharpError):
    pass


class ZeroInput(CharpError):
    pass


class DimensionMismatch(CharpError):
    pass


class ExponentOverflow(CharpError):
    pass


class UnsupportedPrime(CharpError):
    pass


class ZeroElement(CharpError):
    pass


class NotIndependent(CharpError):
    pass


class RankMismatch(CharpError):
    pass


class TowerMismatch(CharpError):
    pass


class NotACycle(CharpError):
    pass


class RootFailure(CharpError):
    pass


class RankNotOne(CharpError):
    pass


class NotInNu2(CharpError):
    pass


class SolveFailed(CharpError):
    """An internal solve gave up; only possible for p > 2 inputs."""


class BudgetExhausted(SolveFailed):
    """A step budget ran out before the decomposition finished."""


class HypothesisFails(CharpError):
    pass


class DegenerateExtension(CharpError):
    pass


class ZeroB(CharpError):
    pass


class FieldMismatch(CharpError):
    pass


class NotDegreeP(CharpError):
    pass


class ResidueNotSplit(CharpError):
    pass


class UnsupportedN(CharpError):
    pass


class MalformedSlot(CharpError):
    pass


class DecomposeFailed(CharpError):
    pass


class RankTooLow(CharpError):
    pass


class NonCoordinateRoot(CharpError):
    pass


class NotInSab(CharpError):
    pass


class ParseError(CharpError):
    """Syntax error with source location."""

    def __init__(self, message, line=1, column=0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column
