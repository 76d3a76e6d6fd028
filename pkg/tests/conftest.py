import numpy as np
import pytest

from ponly import Dataset
from ponly.rng import make_rng


def random_dataset(seed, n1=40, n0=300, p=2, shift=0.4, area=1.0):
    """Small overlapping-Gaussians dataset; shift keeps beta finite."""
    rng = make_rng(seed, 999)
    Xp = shift + rng.standard_normal((n1, p))
    Xb = rng.standard_normal((n0, p))
    X = np.vstack([Xp, Xb])
    y = np.concatenate([np.ones(n1), np.zeros(n0)])
    return Dataset(X, y, area)


def fd_gradient(f, theta, h=1e-5):
    """Central-difference gradient of a scalar function."""
    theta = np.asarray(theta, dtype=float)
    g = np.zeros_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        g[j] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g


def fd_jacobian(grad_fn, theta, h=1e-5):
    """Central-difference Jacobian of a vector function (Hessian check)."""
    theta = np.asarray(theta, dtype=float)
    g0 = np.asarray(grad_fn(theta))
    J = np.zeros((g0.size, theta.size))
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        J[:, j] = (np.asarray(grad_fn(theta + e))
                   - np.asarray(grad_fn(theta - e))) / (2 * h)
    return J


def rel_err(approx, exact):
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    denom = max(float(np.max(np.abs(exact))), 1.0)
    return float(np.max(np.abs(approx - exact))) / denom


@pytest.fixture
def small_data():
    return random_dataset(3)
