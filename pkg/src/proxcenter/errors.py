"""Exception hierarchy."""


class ProxCenterError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ProxCenterError, ValueError):
    """Shape mismatch between problem data and supplied vectors.

    ``agent`` holds the index of the offending agent block, or ``None`` when
    the mismatch is not attributable to a single agent.
    """

    def __init__(self, message, agent=None):
        if agent is not None:
            message = f"agent {agent}: {message}"
        super().__init__(message)
        self.agent = agent


class InfeasiblePointError(ProxCenterError, ValueError):
    """A point lies outside its feasible set beyond the membership tolerance."""


class NotConvexError(ProxCenterError, ValueError):
    """A Hessian block failed the symmetry or positive semidefiniteness check."""


class ConvergenceError(ProxCenterError, RuntimeError):
    """An iterative routine hit its iteration cap.

    ``residual`` carries the last measured residual of the routine.
    """

    def __init__(self, message, residual=float("nan"), agent=None):
        if agent is not None:
            message = f"agent {agent}: {message}"
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual
        self.agent = agent
