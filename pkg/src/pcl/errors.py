"""Exception hierarchy shared by all modules."""


class PCLError(Exception):
    """Base class for every error raised by the package."""


class DomainError(PCLError, ValueError):
    """Input outside the domain of a function (non-finite value, bad tau, ...)."""


class PoleError(DomainError):
    """Evaluation point too close to a pole or a singular set."""


class DegeneracyError(DomainError):
    """A reconstruction divides by a quantity that vanishes."""


class BranchError(DegeneracyError):
    """A change of variables is evaluated at one of its branch points."""


class ConsistencyError(PCLError):
    """Auxiliary data does not match the classical state it is paired with."""


class BlowUpError(PCLError):
    """Integration stopped because the solution approached a movable singularity."""

    def __init__(self, message, last_state=None, partial=None):
        super().__init__(message)
        self.last_state = last_state
        self.partial = partial


class ConvergenceError(PCLError):
    """An iterative method did not converge."""


class AmbiguityError(PCLError):
    """A search region does not contain exactly one root."""


class PathError(PCLError):
    """A transport path crosses (or gets too close to) a pole."""


class ConfigError(PCLError, ValueError):
    """Invalid run configuration."""
