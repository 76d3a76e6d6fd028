"""Shared damped-Newton engine with proximal handling of l1 terms.

Maximizes concave objectives of the form  f(theta) - J(theta_penalized)
where ``f`` supplies exact value/gradient/Hessian and J is a Penalty.
Internally the engine minimizes phi = -f + J. Smooth penalty parts (l2)
enter the gradient and Hessian directly; l1 parts are handled by a
proximal Newton step: the quadratic model at each iterate is minimized by
cyclic coordinate descent with soft-thresholding, followed by a
backtracking line search on the true penalized objective.

Optimality is measured by the infinity norm of the minimum-norm
subgradient of phi, so the same ``grad_tol`` applies with and without l1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InfeasiblePointError, NonConvergenceError, RankDeficiencyError
from .penalties import Penalty

# a standardized-scale iterate this large means the data are separable
_DIVERGENCE_NORM = 1e3
_MAX_CD_SWEEPS = 1000


@dataclass(frozen=True)
class OptimOptions:
    """Solver and W-escalation constants (all tolerances are on the
    solver's scaled objective; fits scale likelihoods by 1/n1)."""

    grad_tol: float = 1e-10
    max_iter: int = 200
    ls_shrink: float = 0.5
    ls_decrease: float = 1e-4
    w_initial: float = 1e4
    w_target_maxfit: float = 1e-3
    w_growth: float = 100.0
    w_change_tol: float = 1e-8

    def __post_init__(self):
        for name in ("grad_tol", "max_iter", "ls_shrink", "ls_decrease",
                     "w_initial", "w_target_maxfit", "w_growth", "w_change_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.grad_tol < 1:
            raise ValueError("grad_tol must be < 1")


@dataclass
class Diagnostics:
    converged: bool
    iterations: int
    grad_norm: float


def newton_solve(objective, start, penalty=None, opts=None, n_unpenalized=1):
    """Maximize objective(theta) - J(theta[n_unpenalized:]).

    ``objective`` maps theta -> (value, gradient, hessian) of a concave
    function; evaluations may raise InfeasiblePointError, which rejects the
    trial step during line search. Returns (theta_hat, Diagnostics).

    Raises RankDeficiencyError when the problem is singular at the starting
    point (collinear features without an l2 ridge), and NonConvergenceError
    on iteration exhaustion or divergence along an ascent ray.
    """
    penalty = penalty or Penalty.none()
    opts = opts or OptimOptions()
    theta = np.asarray(start, dtype=float).copy()
    k = theta.shape[0]
    npen = k - n_unpenalized
    l1w = np.concatenate([np.zeros(n_unpenalized), penalty.l1_weights(npen)])
    l2w = np.concatenate([np.zeros(n_unpenalized), penalty.l2_weights(npen)])
    has_l1 = bool(np.any(l1w > 0))

    def phi_at(th):
        value, grad, hess = objective(th)
        if not np.isfinite(value):
            raise InfeasiblePointError("objective is not finite")
        phi = -value + 0.5 * float(l2w @ th**2) + float(l1w @ np.abs(th))
        gsm = -grad + l2w * th          # gradient of the smooth part of phi
        H = -hess + np.diag(l2w)
        return phi, gsm, H

    phi, gsm, H = phi_at(theta)  # infeasible start propagates to the caller

    it = 0
    for it in range(1, opts.max_iter + 1):
        res = _min_norm_subgrad(gsm, theta, l1w)
        gnorm = float(np.max(np.abs(res)))
        if gnorm <= opts.grad_tol:
            return theta, Diagnostics(True, it - 1, gnorm)

        if float(np.max(np.abs(theta))) > _DIVERGENCE_NORM:
            d = theta / np.linalg.norm(theta)
            raise NonConvergenceError(
                "iterates diverging along an unbounded ascent direction "
                "(separable data?)", last_params=theta, direction=d)

        if has_l1:
            step = _prox_newton_direction(gsm, H, theta, l1w, opts, first=it == 1)
        else:
            step = _newton_direction(gsm, H, first=it == 1)

        decrease = float(gsm @ step) + float(
            l1w @ (np.abs(theta + step) - np.abs(theta)))
        # below this the value cannot register one-ulp progress; without the
        # slack, true-descent steps get rejected near the optimum and the
        # gradient freezes above tolerance
        slack = 16 * np.finfo(float).eps * max(abs(phi), 1.0)
        t = 1.0
        accepted = False
        while t > 1e-14:
            trial = theta + t * step
            try:
                phi_t, gsm_t, H_t = phi_at(trial)
            except InfeasiblePointError:
                t *= opts.ls_shrink
                continue
            if phi_t <= phi + opts.ls_decrease * t * decrease + slack:
                theta, phi, gsm, H = trial, phi_t, gsm_t, H_t
                accepted = True
                break
            t *= opts.ls_shrink
        if not accepted:
            res = _min_norm_subgrad(gsm, theta, l1w)
            gnorm = float(np.max(np.abs(res)))
            if gnorm <= opts.grad_tol:
                return theta, Diagnostics(True, it, gnorm)
            raise NonConvergenceError(
                f"line search stalled at gradient norm {gnorm:.3g}",
                last_params=theta)

    res = _min_norm_subgrad(gsm, theta, l1w)
    gnorm = float(np.max(np.abs(res)))
    raise NonConvergenceError(
        f"no convergence in {opts.max_iter} iterations "
        f"(gradient norm {gnorm:.3g})", last_params=theta)


def _min_norm_subgrad(gsm, theta, l1w):
    """Minimum-norm element of the subdifferential of phi at theta."""
    res = gsm.copy()
    pos = theta > 0
    neg = theta < 0
    zero = ~(pos | neg) & (l1w > 0)
    res[pos] += l1w[pos]
    res[neg] -= l1w[neg]
    res[zero] = np.sign(res[zero]) * np.maximum(np.abs(res[zero]) - l1w[zero], 0.0)
    return res


def _newton_direction(gsm, H, first):
    try:
        L = np.linalg.cholesky(H)
        if first:
            # standardized curvature is O(1) here, so a pivot this small
            # means a constant or collinear feature, not conditioning noise
            dmin = float(np.min(np.diag(L))) ** 2
            if dmin < 1e-10 * max(float(np.max(np.diag(H))), 1e-300):
                raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        if first:
            raise RankDeficiencyError(
                "singular Hessian at the starting point: features are "
                "collinear or constant; drop features or add an l2 penalty"
            ) from None
        # transient ill-conditioning away from the optimum: damp and move on
        ridge = 1e-10 * max(float(np.trace(H)) / H.shape[0], 1.0)
        for _ in range(30):
            try:
                L = np.linalg.cholesky(H + ridge * np.eye(H.shape[0]))
                break
            except np.linalg.LinAlgError:
                ridge *= 10.0
        else:
            raise RankDeficiencyError("Hessian is numerically singular") from None
    z = np.linalg.solve(L, -gsm)
    return np.linalg.solve(L.T, z)


def _prox_newton_direction(gsm, H, theta, l1w, opts, first):
    """Minimize the l1-penalized quadratic model by coordinate descent."""
    diag = np.diag(H)
    if np.any(diag <= 1e-12 * max(float(diag.max(initial=0.0)), 1.0)):
        if first:
            raise RankDeficiencyError(
                "zero curvature for a coefficient at the starting point: "
                "constant feature makes the l1 subproblem degenerate")
        diag = np.maximum(diag, 1e-12 * max(float(diag.max(initial=0.0)), 1.0))
    z = theta.copy()
    d = np.zeros_like(theta)
    tol = max(0.05 * opts.grad_tol, 1e-15)
    for _ in range(_MAX_CD_SWEEPS):
        biggest = 0.0
        for j in range(len(theta)):
            cj = gsm[j] + float(H[j] @ d)
            target = z[j] - cj / diag[j]
            if l1w[j] > 0:
                thr = l1w[j] / diag[j]
                new = np.sign(target) * max(abs(target) - thr, 0.0)
            else:
                new = target
            change = new - z[j]
            if change != 0.0:
                z[j] = new
                d[j] += change
                biggest = max(biggest, abs(change))
        if biggest <= tol:
            break
    return d
