"""Pure-numpy reference implementations of the hot accumulation kernels.

These are the fallback used when the compiled extension is unavailable and
the ground truth the compiled kernels are tested against.
"""

import numpy as np

# e^u is only evaluated for u <= U_MAX; beyond that the caller gets the
# offending row index back and raises an infeasible-point error.
U_MAX = 700.0


def exp_moments(u, w, x):
    """Accumulate sum_i w_i e^{u_i} (1, x_i, x_i x_i') over rows.

    Parameters
    ----------
    u : (n,) float64 linear predictors
    w : (n,) float64 nonnegative weights
    x : (n, p) float64 feature rows

    Returns
    -------
    (s0, s1, s2, bad) : scalar, (p,), (p, p) symmetric, int
        ``bad`` is the index of the first row with u > U_MAX (the sums are
        then undefined), or -1 if all rows are feasible.
    """
    p = x.shape[1]
    over = np.nonzero(u > U_MAX)[0]
    if over.size:
        return 0.0, np.zeros(p), np.zeros((p, p)), int(over[0])
    e = w * np.exp(u)
    s0 = float(e.sum())
    s1 = x.T @ e
    s2 = x.T @ (e[:, None] * x)
    s2 = 0.5 * (s2 + s2.T)
    return s0, s1, s2, -1


def logit_moments(u, w, y, x):
    """Weighted Bernoulli log-likelihood terms and derivative accumulators.

    Computes, with mu_i = sigmoid(u_i) and c_i = w_i mu_i (1 - mu_i):

        ll = sum_i w_i (y_i u_i - log(1 + e^{u_i}))
        g0 = sum_i w_i (y_i - mu_i)        g1 = sum_i w_i (y_i - mu_i) x_i
        h0 = sum_i c_i                     h1 = sum_i c_i x_i
        h2 = sum_i c_i x_i x_i'

    log(1 + e^u) and sigmoid are evaluated in the numerically stable form
    (never exponentiating a positive argument), so no overflow guard is
    needed here.

    Returns (ll, g0, g1, h0, h1, h2).
    """
    pos = u > 0
    enu = np.exp(-np.abs(u))
    log1pexp = np.where(pos, u, 0.0) + np.log1p(enu)
    mu = np.where(pos, 1.0 / (1.0 + enu), enu / (1.0 + enu))

    ll = float(np.sum(w * (y * u - log1pexp)))
    r = w * (y - mu)
    g0 = float(r.sum())
    g1 = x.T @ r
    c = w * mu * (1.0 - mu)
    h0 = float(c.sum())
    h1 = x.T @ c
    h2 = x.T @ (c[:, None] * x)
    h2 = 0.5 * (h2 + h2.T)
    return ll, g0, g1, h0, h1, h2
