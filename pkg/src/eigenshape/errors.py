"""Exception types raised across the package."""


class EigenshapeError(Exception):
    """Base class for all package errors."""


class DegenerateInput(EigenshapeError, ValueError):
    pass


class NonPositiveScale(EigenshapeError, ValueError):
    pass


class UnsupportedDimension(EigenshapeError, ValueError):
    pass


class UnknownFunctional(EigenshapeError, KeyError):
    pass


class ResolutionTooCoarse(EigenshapeError, ValueError):
    """The grid has too few interior nodes for the requested body."""


class SolverNoConvergence(EigenshapeError, RuntimeError):
    pass


class HypothesisViolated(EigenshapeError, ValueError):
    """Inputs fall outside the range where a bound is claimed to hold."""


class HypothesisFailed(EigenshapeError, ValueError):
    """A set functional does not satisfy the structural hypotheses of a problem."""


class MissingEstimate(EigenshapeError, ValueError):
    pass


class MismatchedRuns(EigenshapeError, ValueError):
    pass
