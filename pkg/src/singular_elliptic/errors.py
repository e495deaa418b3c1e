"""Exception hierarchy shared by all modules."""


class SingularEllipticError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(SingularEllipticError, ValueError):
    pass


class EvaluationError(SingularEllipticError, ArithmeticError):
    """A user evaluator or a quadrature produced a non-finite or unusable value."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DivergentEnvelope(SingularEllipticError):
    """The Keller-Osserman integral diverges, so the envelope does not exist."""


class RangeError(SingularEllipticError, ValueError):
    pass


class NoProfileFound(SingularEllipticError):
    pass


class SolverError(SingularEllipticError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(SingularEllipticError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class Unsupported(SingularEllipticError, NotImplementedError):
    pass


class ResolutionError(SingularEllipticError, ValueError):
    pass


class NonConvergence(SingularEllipticError):
    """A limiting sequence (mollifier widths, k- or n-schedules) did not settle."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []
