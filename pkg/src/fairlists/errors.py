"""Exception hierarchy. Every library error derives from FairlistsError so
callers (and the CLI) can map them to a single failure class."""


class FairlistsError(Exception):
    pass


# data loading / preprocessing
class MissingColumn(FairlistsError):
    pass


class NonBinaryCell(FairlistsError):
    pass


class EmptyFile(FairlistsError):
    pass


class TooManyCategories(FairlistsError):
    pass


class SingleCategory(FairlistsError):
    pass


class NoAntecedents(FairlistsError):
    pass


class EmptyPart(FairlistsError):
    pass


# rule lists
class UnknownAntecedent(FairlistsError):
    pass


class LengthMismatch(FairlistsError):
    pass


# fairness metrics
class EmptyGroup(FairlistsError):
    pass


class LabelsRequired(FairlistsError):
    pass


class UndefinedRate(FairlistsError):
    pass


# search
class NoAntecedentsAllowed(FairlistsError):
    pass


class BudgetZero(FairlistsError):
    pass


# rationalization
class KOutOfRange(FairlistsError):
    pass


class EmptyCohort(FairlistsError):
    pass


# audit
class OracleMissingRow(FairlistsError):
    pass
