"""Exception types raised across the package."""


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class DomainError(ValueError):
    """An operator was evaluated outside the interval it is defined on."""


class MonotonicityError(ValueError):
    """A supposedly nondecreasing map was caught decreasing."""

    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


class NotMonotoneStart(ValueError):
    """``T(start)`` is not comparable with ``start``."""


class OrbitOrderViolation(RuntimeError):
    """A monotone orbit stopped being monotone (the operator is not monotone)."""


class AnchorSearchError(RuntimeError):
    """No anchor pair could be certified along the segment."""

    def __init__(self, message, best_margins=None):
        super().__init__(message)
        self.best_margins = dict(best_margins or {})


class AnchorOverlapError(AnchorSearchError):
    """Both anchors were found but they are not strictly ordered."""


class JacobianBreakdown(RuntimeError):
    """The finite-difference Jacobian is numerically singular."""

    def __init__(self, message, iterate=None, iterations=0):
        super().__init__(message)
        self.iterate = iterate
        self.iterations = iterations


class EvaluationError(RuntimeError):
    """Operator evaluation failed; ``input`` is the offending argument."""

    def __init__(self, message, input=None):
        super().__init__(message)
        self.input = input
