"""Exception types shared across the package."""


class MuskatError(Exception):
    """Base class for all package errors."""


class ConfigError(MuskatError, ValueError):
    """Invalid run configuration: an unknown key or a value that breaks an invariant."""


class SingularOperatorError(MuskatError, ArithmeticError):
    """The discretized second-kind operator lost a pivot."""


class NoConvergence(MuskatError, RuntimeError):
    """Newton iteration did not reach the tolerance."""


class SingularJacobian(MuskatError, ArithmeticError):
    """Newton Jacobian is numerically singular (usually near a fold)."""


class NoGraph(MuskatError, ValueError):
    """The interface inclination reached pi/2, so it is not a graph."""
