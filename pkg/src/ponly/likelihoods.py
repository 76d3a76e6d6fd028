"""Value, gradient, and Hessian of the four presence-only log-likelihoods.

All four objectives are concave in their parameters and share the same
background quadrature rule: integrals over the study region are replaced
by weighted sums over the background rows, with the uniform default weight
|D| / n0. Additive constants that do not involve the parameters (log n1!,
the per-cell log N! terms) are dropped from every value, so comparisons
across likelihoods must go through the documented identities rather than
raw values:

    ipp(alpha*, beta)   = maxent(beta) + n1 log n1 - n1     (alpha* backfilled)

Gradients put the intercept first; the Maxent objective has no intercept
and its gradient/Hessian have dimension p.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import exp_moments, logit_moments
from .errors import InfeasiblePointError
from .sampling import grid_centers


@dataclass(frozen=True)
class ObjectiveEval:
    """One likelihood evaluation: value, exact gradient, exact Hessian."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


@dataclass(frozen=True)
class BinnedCounts:
    """Presence counts per background cell of a regular grid."""

    counts: np.ndarray  # (n0,) nonnegative ints summing to n1
    cell_area: float

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or np.any(counts < 0):
            raise ValueError("counts must be a 1-d nonnegative array")
        if not float(self.cell_area) > 0:
            raise ValueError("cell_area must be positive")
        counts = np.ascontiguousarray(counts, dtype=np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "cell_area", float(self.cell_area))

    @property
    def n1(self):
        return int(self.counts.sum())


def _exp_stack(intercept, beta, X, w):
    """exp_moments over rows with u = intercept + X beta, raising on overflow."""
    u = intercept + X @ beta
    s0, s1, s2, bad = exp_moments(u, w, X)
    if bad >= 0:
        raise InfeasiblePointError(
            f"exp overflow in linear predictor at row {bad} (u = {u[bad]:.3g})",
            row=bad,
        )
    return s0, s1, s2


def _pack(g0, g1, h00, h01, h11):
    grad = np.concatenate([[g0], g1])
    p = len(g1)
    hess = np.empty((p + 1, p + 1))
    hess[0, 0] = h00
    hess[0, 1:] = h01
    hess[1:, 0] = h01
    hess[1:, 1:] = h11
    return grad, hess


def ipp_eval(alpha, beta, Xb, w, presence_x_sum, n1):
    """Numerical IPP log-likelihood pieces from raw arrays.

    value = n1 alpha + presence_x_sum' beta - sum_i w_i e^{alpha + beta'x_i}
    with the sum over background rows.
    """
    s0, s1, s2 = _exp_stack(alpha, beta, Xb, w)
    value = n1 * alpha + float(presence_x_sum @ beta) - s0
    grad, hess = _pack(n1 - s0, presence_x_sum - s1, s0, s1, s2)
    return ObjectiveEval(value, grad, -hess)


def maxent_eval(beta, Xb, w, presence_x_sum, n1):
    """Conditional (Maxent) log-likelihood pieces from raw arrays.

    value = presence_x_sum' beta - n1 log sum_i w_i e^{beta'x_i}.
    """
    s0, s1, s2 = _exp_stack(0.0, beta, Xb, w)
    mean = s1 / s0
    value = float(presence_x_sum @ beta) - n1 * np.log(s0)
    grad = presence_x_sum - n1 * mean
    hess = -n1 * (s2 / s0 - np.outer(mean, mean))
    hess = 0.5 * (hess + hess.T)
    return ObjectiveEval(value, grad, hess)


def logistic_eval(eta, beta, X, y, case_w):
    """Weighted logistic log-likelihood pieces from raw arrays.

    value = sum_{y=1} (eta + beta'x_i) - sum_i case_w_i log(1 + e^{eta+beta'x_i})
    where case_w is 1 on presence rows and the background weight W elsewhere.
    """
    u = eta + X @ beta
    ll, g0, g1, h0, h1, h2 = logit_moments(u, case_w, y, X)
    grad, hess = _pack(g0, g1, h0, h1, h2)
    return ObjectiveEval(ll, grad, -hess)


def poisson_llm_eval(alpha, beta, counts, Xc, cell_area):
    """Discretized Poisson log-linear model pieces from raw arrays.

    value = sum_i N_i (alpha + beta'x_i) - cell_area * sum_i e^{alpha+beta'x_i}
    over background cells (log N_i! dropped).
    """
    n0 = Xc.shape[0]
    w = np.full(n0, cell_area)
    s0, s1, s2 = _exp_stack(alpha, beta, Xc, w)
    n1 = counts.sum()
    cx = Xc.T @ counts.astype(float)
    value = n1 * alpha + float(cx @ beta) - s0
    grad, hess = _pack(n1 - s0, cx - s1, s0, s1, s2)
    return ObjectiveEval(value, grad, -hess)


# ---------------------------------------------------------------------------
# Dataset-facing wrappers


def ipp_loglik(alpha, beta, data):
    """Numerical IPP log-likelihood at (alpha, beta) on ``data``.

    Overflow of e^{alpha + beta'x} on a background row raises
    InfeasiblePointError carrying that row's index in the dataset.
    """
    beta = _check_beta(beta, data.p)
    px = data.presence_X.sum(axis=0)
    with _remap_rows(data):
        return ipp_eval(float(alpha), beta, data.background_X, data.weights(),
                        px, data.n1)


def maxent_loglik(beta, data):
    """Maxent (conditional-on-n1) log-likelihood at ``beta`` on ``data``."""
    beta = _check_beta(beta, data.p)
    px = data.presence_X.sum(axis=0)
    with _remap_rows(data):
        return maxent_eval(beta, data.background_X, data.weights(), px, data.n1)


class _remap_rows:
    """Translate a background-local infeasible row index to a dataset row."""

    def __init__(self, data):
        self.data = data

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if isinstance(exc, InfeasiblePointError) and exc.row is not None:
            raise InfeasiblePointError(
                f"exp overflow in linear predictor at dataset row "
                f"{int(self.data._background[exc.row])}",
                row=int(self.data._background[exc.row]),
            ) from None
        return False


def logistic_loglik(eta, beta, data, W=1.0):
    """Weighted logistic log-likelihood; W >= 1 upweights background rows."""
    if not W >= 1.0:
        raise ValueError(f"W must be >= 1, got {W}")
    beta = _check_beta(beta, data.p)
    case_w = np.where(data.y == 1, 1.0, float(W))
    return logistic_eval(float(eta), beta, data.X, data.y, case_w)


def poisson_llm_loglik(alpha, beta, binned, cell_features):
    """Poisson log-linear model log-likelihood on binned presence counts."""
    Xc = np.ascontiguousarray(np.atleast_2d(np.asarray(cell_features, dtype=float)))
    if Xc.shape[0] != len(binned.counts):
        raise ValueError("cell_features must have one row per cell")
    beta = _check_beta(beta, Xc.shape[1])
    return poisson_llm_eval(float(alpha), beta, binned.counts, Xc,
                            binned.cell_area)


def _check_beta(beta, p):
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if beta.shape != (p,):
        raise ValueError(f"beta must have length {p}, got shape {beta.shape}")
    return beta


# ---------------------------------------------------------------------------
# Presence binning for the Berman-Turner device


def bin_presence(presence, background, domain):
    """Assign each presence location to its nearest background grid cell.

    ``background`` must be the regular lattice of cell centers over
    ``domain`` (any row order); counts are indexed by background row.
    A presence point equidistant between two centers goes to the cell with
    the lower per-axis lattice index. Returns BinnedCounts with counts
    summing to the number of presence points.
    """
    presence = np.atleast_2d(np.asarray(presence, dtype=float))
    background = np.atleast_2d(np.asarray(background, dtype=float))
    n0, d = background.shape
    if d != domain.ndim:
        raise ValueError("background dimension does not match domain")

    try:
        lattice = grid_centers(domain, n0)
    except ValueError as exc:
        raise ValueError(f"background is not a regular grid: {exc}") from exc
    m = round(n0 ** (1.0 / d))
    bounds = domain.bounds
    cell = (bounds[:, 1] - bounds[:, 0]) / m

    # map each background row to its lattice index and demand a permutation
    idx = _lattice_index(background, bounds, cell, m)
    if np.any(idx < 0) or np.any(idx > m - 1):
        raise ValueError("background is not a regular grid over the domain")
    flat = _flatten(idx, m)
    if np.any(np.abs(background - lattice[flat]) > 1e-9 * cell):
        raise ValueError("background is not a regular grid over the domain")
    order = np.full(n0, -1, dtype=np.int64)
    order[flat] = np.arange(n0)
    if np.any(order < 0):
        raise ValueError("background is not a regular grid (duplicate cells)")

    pres_idx = np.clip(_lattice_index(presence, bounds, cell, m), 0, m - 1)
    counts = np.bincount(order[_flatten(pres_idx, m)], minlength=n0)
    return BinnedCounts(counts=counts, cell_area=float(domain.area / n0))


def _lattice_index(points, bounds, cell, m):
    # nearest center with round-half-down so ties pick the lower index
    t = (points - bounds[:, 0]) / cell - 0.5
    return np.ceil(t - 0.5).astype(np.int64)


def _flatten(idx, m):
    flat = idx[:, 0]
    for k in range(1, idx.shape[1]):
        flat = flat * m + idx[:, k]
    return flat
