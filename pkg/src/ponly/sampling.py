"""Background sampling, point-process simulation, thinning, and assembly."""

import numpy as np

from .dataset import Dataset
from .errors import ModelInvalidError
from .rng import as_rng

# Rejection-sampling envelope: M = ENVELOPE_SLACK * max(lambda) over a probe
# grid of PROBE_NODES cells. Safe for the smooth intensities in scope.
ENVELOPE_SLACK = 1.2
PROBE_NODES = 10_000


def identity_features(z):
    """Feature map x(z) = z."""
    return np.atleast_2d(np.asarray(z, dtype=float))


def quadratic_features(z):
    """Feature map (z_1, ..., z_d, z_1^2, ..., z_d^2)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return np.hstack([z, z**2])


def grid_centers(domain, n0):
    """Cell centers of the regular n0-cell lattice over ``domain``.

    Requires n0 = m^d for integer m so the cells partition the domain into
    equal squares; anything else raises rather than silently distorting
    cell areas. Returned in C order (first axis slowest), shape (n0, d).
    """
    if n0 < 1:
        raise ValueError("n0 must be at least 1")
    d = domain.ndim
    m = round(n0 ** (1.0 / d))
    # counteract float root error for near-cubes
    while m**d < n0:
        m += 1
    while m**d > n0:
        m -= 1
    if m < 1 or m**d != n0:
        raise ValueError(
            f"grid mode needs n0 = m^{d} for integer m in {d}-d, got n0={n0}"
        )
    axes = []
    for lo, hi in domain.bounds:
        k = np.arange(m)
        axes.append(lo + (k + 0.5) * (hi - lo) / m)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def sample_background(domain, n0, mode="uniform", seed=0):
    """Draw n0 background locations, shape (n0, d).

    ``uniform`` draws i.i.d. uniform points over the domain; ``grid``
    returns the regular lattice of cell centers (n0 must be a d-th power).
    """
    if n0 < 1:
        raise ValueError("n0 must be at least 1")
    if mode == "grid":
        return grid_centers(domain, n0)
    if mode != "uniform":
        raise ValueError(f"mode must be 'uniform' or 'grid', got {mode!r}")
    rng = as_rng(seed)
    b = domain.bounds
    return rng.uniform(b[:, 0], b[:, 1], size=(n0, domain.ndim))


def simulate_ipp(model, domain, feature_map=identity_features, seed=0,
                 probe_nodes=PROBE_NODES):
    """Simulate one realization of an inhomogeneous Poisson process.

    Draws the point count N ~ Poisson(Lambda(D)) with Lambda(D) evaluated
    by midpoint quadrature on a dense probe grid, then draws N locations
    with density lambda / Lambda(D) by rejection against a uniform
    envelope. Returns locations, shape (N, d); N may be 0.
    """
    d = domain.ndim
    m = max(2, round(probe_nodes ** (1.0 / d)))
    probe = grid_centers(domain, m**d)
    lam_probe = model.intensity(feature_map(probe))
    if not np.all(np.isfinite(lam_probe)):
        raise ModelInvalidError("intensity is non-finite on the probe grid")
    if np.any(lam_probe < 0):
        raise ModelInvalidError("intensity is negative on the probe grid")
    total = float(lam_probe.mean() * domain.area)
    if not np.isfinite(total):
        raise ModelInvalidError("integrated intensity is not finite")
    envelope = ENVELOPE_SLACK * float(lam_probe.max())

    rng = as_rng(seed)
    n = int(rng.poisson(total))
    if n == 0:
        return np.empty((0, d))

    b = domain.bounds
    accepted = []
    remaining = n
    accept_rate = max(total / (envelope * domain.area), 1e-6)
    guard = 0
    while remaining > 0:
        batch = max(1000, int(2 * remaining / accept_rate))
        z = rng.uniform(b[:, 0], b[:, 1], size=(batch, d))
        lam = model.intensity(feature_map(z))
        if not np.all(np.isfinite(lam)):
            raise ModelInvalidError("intensity is non-finite at proposed points")
        keep = rng.random(batch) * envelope < lam
        z = z[keep]
        accepted.append(z[:remaining])
        remaining -= min(len(z), remaining)
        guard += 1
        if guard > 1000:
            raise ModelInvalidError(
                "rejection sampling stalled; intensity may exceed its envelope"
            )
    return np.vstack(accepted)


def thin_process(points, model, feature_map=identity_features, seed=0):
    """Keep each point independently with probability s(z); preserves order."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if len(points) == 0:
        return points
    s = model.detection_prob(feature_map(points))
    rng = as_rng(seed)
    return points[rng.random(len(points)) < s]


def assemble_dataset(presence, background, feature_map, domain_area,
                     quad_weights=None):
    """Build a Dataset from locations: presence rows first, then background."""
    presence = np.asarray(presence, dtype=float)
    background = np.asarray(background, dtype=float)
    if presence.size == 0:
        raise ValueError("presence list is empty")
    if background.size == 0:
        raise ValueError("background list is empty")
    Xp = np.atleast_2d(feature_map(presence))
    Xb = np.atleast_2d(feature_map(background))
    X = np.vstack([Xp, Xb])
    y = np.concatenate([np.ones(len(Xp)), np.zeros(len(Xb))])
    return Dataset(X, y, domain_area, quad_weights=quad_weights)
