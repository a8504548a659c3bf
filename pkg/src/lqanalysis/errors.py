"""Exception hierarchy shared across the package."""


class LqAnalysisError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(LqAnalysisError, ValueError):
    pass


class InvalidShape(LqAnalysisError, ValueError):
    pass


class NotPositiveDefinite(LqAnalysisError, ValueError):
    pass


class SingularSystem(LqAnalysisError, ArithmeticError):
    pass


class InfeasibleCosparsity(LqAnalysisError, ValueError):
    """No drawn cosupport admits a nonzero vector in its null space."""


class InfeasibleRegime(LqAnalysisError, ValueError):
    pass


class ConditionViolated(LqAnalysisError, ValueError):
    """A recovery condition required by a bound does not hold."""


class UndefinedRegime(LqAnalysisError, ValueError):
    pass


class TooLarge(LqAnalysisError, ValueError):
    """Brute-force enumeration would exceed the combinatorial budget."""


class EmptyModel(LqAnalysisError, ValueError):
    pass


class IoError(LqAnalysisError, OSError):
    """An output file or directory could not be written."""
