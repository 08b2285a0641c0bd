"""Exception hierarchy shared across the package."""


class CondGradError(Exception):
    """Base class for all package errors."""


class DimensionError(CondGradError, ValueError):
    pass


class DegenerateInputError(CondGradError, ValueError):
    pass


class ConvergenceError(CondGradError, RuntimeError):
    """Iterative routine stopped at ``max_iter`` before meeting its tolerance.

    The best iterate found so far is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class UnboundedError(CondGradError, ValueError):
    """The linear objective is unbounded below on the feasible set."""


class InfeasibleError(CondGradError, ValueError):
    pass


class UnsupportedOperationError(CondGradError, NotImplementedError):
    pass


class ConfigError(CondGradError, ValueError):
    pass


class IdxFormatError(CondGradError, ValueError):
    pass
