"""Exception types raised by model evaluation and fitting."""


class ModelInvalidError(ValueError):
    """A synthetic model is invalid at the points where it was evaluated
    (non-finite intensity, detection probability outside [0, 1], ...)."""


class FitError(RuntimeError):
    """Base class for failures while maximizing a likelihood."""


class InfeasiblePointError(FitError):
    """A likelihood was evaluated where e^{linear predictor} overflows.

    ``row`` is the index of the first offending dataset row. Line searches
    treat this as a rejected step rather than an error.
    """

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class NonConvergenceError(FitError):
    """The solver did not reach the optimality tolerance.

    ``last_params`` holds the final iterate; ``direction`` is set when the
    failure looks like divergence along an unbounded ascent direction
    (e.g. separable data).
    """

    def __init__(self, message, last_params=None, direction=None):
        super().__init__(message)
        self.last_params = last_params
        self.direction = direction


class RankDeficiencyError(FitError):
    """The unpenalized objective has a singular Hessian (collinear or
    constant features), so the maximizer is not unique."""
