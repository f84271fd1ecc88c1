"""Exception hierarchy shared by all symlab modules."""


class SymlabError(Exception):
    """Base class for every error raised by symlab."""


class NotSemisimpleError(SymlabError):
    pass


class NotHyperbolicError(SymlabError):
    pass


class GapViolatedError(SymlabError):
    pass


class HypothesisViolation(SymlabError):
    """Input violates the assumptions of a quantitative statement."""


class DomainError(SymlabError):
    pass


class CharacteristicDirectionError(SymlabError):
    pass


class InconsistentSymmetrizerError(SymlabError):
    pass


class CutoffTooWideError(SymlabError):
    pass


class ConfigError(SymlabError):
    pass


class FitError(SymlabError):
    pass


class WrapAroundError(SymlabError):
    pass


class SolverError(SymlabError):
    pass


class ConvergenceError(SymlabError):
    """A refinement loop did not settle; ``history`` holds the iterates."""

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = list(history or [])


class EvolutionError(SymlabError):
    """Time stepping produced non-finite values; ``last`` is the last finite state."""

    def __init__(self, message: str, last=None, t: float | None = None):
        super().__init__(message)
        self.last = last
        self.t = t
