"""Exception hierarchy.

``ValidationError`` subclasses signal bad inputs (CLI exit code 2); anything
else escaping a command is a runtime failure (exit code 1).
"""


class GliError(Exception):
    pass


class ValidationError(GliError, ValueError):
    pass


class DimensionMismatch(ValidationError):
    pass


class CellNegative(ValidationError):
    pass


class EmptySubset(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class LinkOutOfRange(ValidationError):
    pass


class TooFewNodes(ValidationError):
    pass


class LayerMismatch(ValidationError):
    pass


class DegenerateMarginal(ValidationError):
    pass


class InconsistentMarginals(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class UnknownScenario(ValidationError):
    pass


class NoTruthAvailable(ValidationError):
    pass


class NegativeMeasure(GliError):
    """A nonnegative measure came out clearly negative: the system is invalid."""


class NoConvergence(GliError):
    pass
