"""Exception hierarchy shared by all solver layers."""


class BsfError(Exception):
    """Base class for every error raised by this package."""


class DisconnectedGraph(BsfError):
    pass


class NotATree(BsfError):
    pass


class TooLarge(BsfError):
    pass


class ParseError(BsfError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InfeasibleDensity(BsfError):
    pass


class GenerationTimeout(BsfError):
    pass


class BadBound(BsfError):
    pass


class InconsistentSolution(BsfError):
    pass


class GuardViolated(BsfError):
    pass


class NumericalFailure(BsfError):
    pass


class MissingCell(BsfError):
    pass
