"""Fit each presence-only model and return a ModelFit.

All fits share the Newton engine in ``ponly.optim``. Internally:

* features are standardized (centered and scaled by their quadrature-
  weighted background moments) for conditioning; coefficients are mapped
  back to the original scale before being reported, and penalties apply to
  the standardized coefficients;
* the objective handed to the engine is the log-likelihood divided by n1,
  so ``grad_tol`` is a per-presence-record (relative) score tolerance:
  the reported ``grad_norm`` refers to this scaled, standardized objective.

The starting point is always the exact optimum of the intercept-only
model: beta = 0 with alpha = log(n1 / |D|) (eta = alpha - log(W n0 / |D|)
for the logistic fits), which keeps the first step finite.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergenceError
from .likelihoods import ipp_eval, logistic_eval, maxent_eval
from .optim import Diagnostics, OptimOptions, newton_solve
from .penalties import Penalty


@dataclass
class ModelFit:
    """A fitted model with its diagnostics.

    ``grad_norm`` is the final optimality residual of the solver's scaled,
    standardized objective (infinity norm of the minimum-norm subgradient);
    ``fitted`` holds per-row fitted intensities (ipp / maxent / poisson_llm)
    or probabilities (logistic / iwlr), aligned with the dataset rows (with
    the grid cells for poisson_llm).
    """

    model: str
    beta: np.ndarray
    alpha: float | None = None
    eta: float | None = None
    W: float | None = None
    converged: bool = False
    iterations: int = 0
    grad_norm: float = math.nan
    fitted: np.ndarray | None = None
    n1: int = 0
    n0: int = 0
    domain_area: float = math.nan
    seed: int | None = None
    penalty: Penalty | None = None
    extras: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "model": self.model,
            "alpha": self.alpha,
            "eta": self.eta,
            "beta": [float(b) for b in self.beta],
            "W": self.W,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "n1": self.n1,
            "n0": self.n0,
            "domain_area": self.domain_area,
            "seed": self.seed,
        }


class Standardizer:
    """Center/scale features by their weighted background moments."""

    def __init__(self, Xb, w):
        total = float(w.sum())
        m = (Xb.T @ w) / total
        var = (Xb**2).T @ w / total - m**2
        s = np.sqrt(np.maximum(var, 0.0))
        floor = 1e-12 * np.maximum(1.0, np.abs(m))
        s = np.where(s > floor, s, 1.0)
        self.mean = m
        self.scale = s

    @classmethod
    def from_dataset(cls, data):
        return cls(data.background_X, data.weights())

    def transform(self, X):
        return np.ascontiguousarray((X - self.mean) / self.scale)

    def beta_to_original(self, beta_std):
        return beta_std / self.scale

    def intercept_to_original(self, intercept_std, beta_std):
        return float(intercept_std - (beta_std * self.mean / self.scale).sum())


def _scaled(eval_fn, scale):
    def objective(theta):
        ev = eval_fn(theta)
        return ev.value * scale, ev.gradient * scale, ev.hessian * scale

    return objective


def fit_ipp(data, penalty=None, opts=None):
    """Maximum likelihood for the numerical IPP model.

    Returns alpha and beta maximizing the (optionally penalized) numerical
    IPP log-likelihood; the score equations (intensity normalization and
    presence feature-moment matching) hold at the optimum to the solver
    tolerance. ``fitted`` holds e^{alpha + beta'x} per row.
    """
    penalty = penalty or Penalty.none()
    opts = opts or OptimOptions()
    std = Standardizer.from_dataset(data)
    Xb = std.transform(data.background_X)
    w = data.weights()
    px = std.transform(data.presence_X).sum(axis=0)
    n1 = data.n1

    obj = _scaled(lambda th: ipp_eval(th[0], th[1:], Xb, w, px, n1), 1.0 / n1)
    start = np.zeros(data.p + 1)
    start[0] = math.log(n1 / data.domain_area)
    theta, diag = newton_solve(obj, start, penalty.scaled(1.0 / n1), opts,
                               n_unpenalized=1)

    beta = std.beta_to_original(theta[1:])
    alpha = std.intercept_to_original(theta[0], theta[1:])
    return ModelFit(
        model="ipp", beta=beta, alpha=alpha,
        converged=diag.converged, iterations=diag.iterations,
        grad_norm=diag.grad_norm, fitted=_intensity(data.X, alpha, beta),
        n1=n1, n0=data.n0, domain_area=data.domain_area, penalty=penalty,
    )


def fit_maxent(data, penalty=None, opts=None):
    """Maximum likelihood for the Maxent (conditional) model.

    The slope estimate coincides with ``fit_ipp``'s for the same data and
    penalty; alpha is backfilled as log n1 - log sum_i w_i e^{beta'x_i} so
    the fitted intensity integrates to exactly n1.
    """
    penalty = penalty or Penalty.none()
    opts = opts or OptimOptions()
    std = Standardizer.from_dataset(data)
    Xb = std.transform(data.background_X)
    w = data.weights()
    px = std.transform(data.presence_X).sum(axis=0)
    n1 = data.n1

    obj = _scaled(lambda b: maxent_eval(b, Xb, w, px, n1), 1.0 / n1)
    theta, diag = newton_solve(obj, np.zeros(data.p), penalty.scaled(1.0 / n1),
                               opts, n_unpenalized=0)

    beta = std.beta_to_original(theta)
    u = data.background_X @ beta
    umax = float(u.max())
    alpha = math.log(n1) - (umax + math.log(float(w @ np.exp(u - umax))))
    return ModelFit(
        model="maxent", beta=beta, alpha=alpha,
        converged=diag.converged, iterations=diag.iterations,
        grad_norm=diag.grad_norm, fitted=_intensity(data.X, alpha, beta),
        n1=n1, n0=data.n0, domain_area=data.domain_area, penalty=penalty,
    )


class _LogisticCore:
    """Standardized weighted-logistic fitting shared by LR and IWLR."""

    def __init__(self, data, penalty, opts):
        self.data = data
        self.penalty = penalty or Penalty.none()
        self.opts = opts or OptimOptions()
        self.std = Standardizer.from_dataset(data)
        self.Xs = self.std.transform(data.X)
        self.y = data.y

    def fit(self, W, start=None):
        data = self.data
        case_w = np.where(self.y == 1, 1.0, float(W))
        obj = _scaled(
            lambda th: logistic_eval(th[0], th[1:], self.Xs, self.y, case_w),
            1.0 / data.n1,
        )
        if start is None:
            start = np.zeros(data.p + 1)
            start[0] = math.log(data.n1 / (W * data.n0))
        theta, diag = newton_solve(obj, start, self.penalty.scaled(1.0 / data.n1),
                                   self.opts, n_unpenalized=1)
        return theta, diag

    def max_fitted(self, theta):
        u = theta[0] + self.Xs @ theta[1:]
        return float(_sigmoid(u).max())

    def finish(self, theta, diag, W, model, extras=None):
        data = self.data
        beta = self.std.beta_to_original(theta[1:])
        eta = self.std.intercept_to_original(theta[0], theta[1:])
        alpha = eta + math.log(W * data.n0 / data.domain_area)
        return ModelFit(
            model=model, beta=beta, alpha=alpha, eta=eta, W=float(W),
            converged=diag.converged, iterations=diag.iterations,
            grad_norm=diag.grad_norm,
            fitted=_sigmoid(eta + data.X @ beta),
            n1=data.n1, n0=data.n0, domain_area=data.domain_area,
            penalty=self.penalty, extras=extras or {},
        )


def fit_logistic(data, W=1.0, penalty=None, opts=None):
    """Weighted logistic regression with fixed background weight W >= 1.

    W = 1 is plain (unweighted) logistic regression. Besides eta, the
    implied IPP intercept alpha = eta + log(W n0 / |D|) is reported.
    """
    if not W >= 1.0:
        raise ValueError(f"W must be >= 1, got {W}")
    core = _LogisticCore(data, penalty, opts)
    theta, diag = core.fit(W)
    return core.finish(theta, diag, W, "logistic")


def fit_iwlr(data, penalty=None, opts=None):
    """Infinitely weighted logistic regression.

    Escalates the background weight W until the fit is indistinguishable
    from the W -> infinity limit: starting from ``opts.w_initial``,
    (1) if max_i fitted > ``opts.w_target_maxfit`` the weight jumps by that
    ratio, and (2) a confirmation refit at ``opts.w_growth`` * W must move
    no coefficient by more than ``opts.w_change_tol``. Because the finite-W
    coefficient error decays exactly like C / W, a failed confirmation is
    used to measure C and jump straight to a sufficient W rather than
    crawling by factors of w_growth; more than 5 escalations raises.

    The returned slope agrees with ``fit_ipp`` far beyond w_change_tol;
    ``extras`` records the escalation rounds and the W trace.
    """
    opts = opts or OptimOptions()
    core = _LogisticCore(data, penalty, opts)

    W = float(opts.w_initial)
    trace = [W]
    theta, diag = core.fit(W)
    rounds = 0

    max_fit = core.max_fitted(theta)
    if max_fit > opts.w_target_maxfit:
        W *= max_fit / opts.w_target_maxfit
        trace.append(W)
        theta, diag = core.fit(W, start=_shift_w(theta, trace[-2], W))
        rounds += 1

    growth = opts.w_growth
    while True:
        W_next = growth * W
        theta_next, diag_next = core.fit(W_next, start=_shift_w(theta, W, W_next))
        dbeta = _beta_change(core.std, theta, theta_next)
        trace.append(W_next)
        if dbeta <= opts.w_change_tol:
            extras = {"rounds": rounds, "w_trace": trace, "final_dbeta": dbeta}
            return core.finish(theta_next, diag_next, W_next, "iwlr", extras)
        rounds += 1
        if rounds > 5:
            raise NonConvergenceError(
                f"W escalation did not stabilize after {rounds} rounds "
                f"(last coefficient change {dbeta:.3g})")
        # finite-W error is C / W: measure C from this (W, growth W) pair
        # and jump to a W whose predicted error sits well below tolerance.
        c_est = dbeta * W / (1.0 - 1.0 / growth)
        W_jump = max(growth * W_next, c_est / (0.05 * opts.w_change_tol))
        theta, diag = core.fit(W_jump, start=_shift_w(theta_next, W_next, W_jump))
        W = W_jump
        trace.append(W)


def _shift_w(theta, w_old, w_new):
    start = theta.copy()
    start[0] -= math.log(w_new / w_old)
    return start


def _beta_change(std, theta_a, theta_b):
    ba = std.beta_to_original(theta_a[1:])
    bb = std.beta_to_original(theta_b[1:])
    return float(np.max(np.abs(ba - bb))) if len(ba) else 0.0


def fit_poisson_llm(binned, cell_features, domain_area, penalty=None, opts=None):
    """Poisson log-linear fit to gridded presence counts (Berman-Turner).

    ``binned`` comes from ``bin_presence``; ``cell_features`` holds one
    feature row per background cell, in the same order as the counts.
    """
    penalty = penalty or Penalty.none()
    opts = opts or OptimOptions()
    Xc = np.ascontiguousarray(np.atleast_2d(np.asarray(cell_features, dtype=float)))
    counts = binned.counts
    if Xc.shape[0] != len(counts):
        raise ValueError("cell_features must have one row per cell")
    n0 = Xc.shape[0]
    n1 = binned.n1
    if n1 < 1:
        raise ValueError("binned counts are empty")
    w = np.full(n0, binned.cell_area)

    std = Standardizer(Xc, w)
    Xs = std.transform(Xc)
    px = Xs.T @ counts.astype(float)
    area = binned.cell_area * n0

    obj = _scaled(lambda th: ipp_eval(th[0], th[1:], Xs, w, px, n1), 1.0 / n1)
    start = np.zeros(Xc.shape[1] + 1)
    start[0] = math.log(n1 / area)
    theta, diag = newton_solve(obj, start, penalty.scaled(1.0 / n1), opts,
                               n_unpenalized=1)

    beta = std.beta_to_original(theta[1:])
    alpha = std.intercept_to_original(theta[0], theta[1:])
    return ModelFit(
        model="poisson_llm", beta=beta, alpha=alpha,
        converged=diag.converged, iterations=diag.iterations,
        grad_norm=diag.grad_norm, fitted=_intensity(Xc, alpha, beta),
        n1=n1, n0=n0, domain_area=float(domain_area), penalty=penalty,
    )


def _intensity(X, alpha, beta):
    with np.errstate(over="ignore"):
        return np.exp(alpha + X @ beta)


def _sigmoid(u):
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out
