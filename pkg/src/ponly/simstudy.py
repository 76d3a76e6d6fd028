"""The 1-d misspecification study: mixture species, population limits, sweeps.

The study lives in feature space: background covariates are drawn i.i.d.
standard normal and presence covariates from a two-component normal
mixture, so the relative intensity lambda(x) = p1(x) / p0(x) is not
log-linear and the unweighted logistic slope limit depends on the
presence/background ratio, while the weighted-logistic / IPP limit is the
presence mean mu1 for every ratio.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .dataset import Dataset
from .errors import FitError, NonConvergenceError
from .optim import OptimOptions, newton_solve
from .rng import make_rng
from .serialize import fmt
from .solvers import fit_iwlr, fit_logistic

QUAD_LIMITS = (-10.0, 10.0)
QUAD_ABS_TOL = 1e-10

# desk-scale default background grid; the paper-scale top point 10^6 is
# opt-in via include_top
DEFAULT_N0_GRID = (1_000, 3_000, 10_000, 30_000, 100_000, 300_000)
TOP_N0 = 1_000_000


@dataclass(frozen=True)
class MixtureSpec1D:
    """Presence law: unit-variance normal mixture over one covariate.

    ``proportions`` are the population proportions of the subspecies and
    ``slopes`` their log-linear coefficients, so the presence density is
    p1 = sum_k pi_k N(slope_k, 1) and mu1 = sum_k pi_k slope_k.
    """

    proportions: tuple = (0.95, 0.05)
    slopes: tuple = (1.5, -2.0)

    def __post_init__(self):
        pi = tuple(float(v) for v in self.proportions)
        sl = tuple(float(v) for v in self.slopes)
        if len(pi) != len(sl) or not pi:
            raise ValueError("proportions and slopes must have equal nonzero length")
        if any(v <= 0 for v in pi) or abs(sum(pi) - 1.0) > 1e-12:
            raise ValueError("proportions must be positive and sum to 1")
        object.__setattr__(self, "proportions", pi)
        object.__setattr__(self, "slopes", sl)

    @classmethod
    def mixture45(cls):
        """The canonical misspecified species: 0.95 N(1.5,1) + 0.05 N(-2,1)."""
        return cls()

    @classmethod
    def mixture45_intensity(cls):
        """Alternate reading: weights taken from the displayed intensity
        0.95 e^{1.5x} + 0.05 e^{-2x}, whose per-component normalizers shift
        the population proportions (selectable for sensitivity analysis)."""
        w = np.array([0.95 * math.exp(1.5**2 / 2), 0.05 * math.exp(2.0**2 / 2)])
        w /= w.sum()
        return cls(proportions=tuple(w), slopes=(1.5, -2.0))

    @classmethod
    def single(cls, slope):
        """Correctly specified control: presence ~ N(slope, 1)."""
        return cls(proportions=(1.0,), slopes=(float(slope),))

    @classmethod
    def correct45(cls):
        """Correctly specified control matching the canonical mean."""
        return cls.single(cls.mixture45().mu1)

    @property
    def mu1(self):
        """Presence-feature mean, sum_k pi_k slope_k."""
        return float(np.dot(self.proportions, self.slopes))

    def presence_density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        for pi, m in zip(self.proportions, self.slopes):
            out += pi * np.exp(-0.5 * (x - m) ** 2) / math.sqrt(2 * math.pi)
        return out

    def background_density(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x**2) / math.sqrt(2 * math.pi)

    def intensity_ratio(self, x):
        """lambda(x) = p1(x) / p0(x) = sum_k pi_k e^{slope_k x - slope_k^2/2}."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        for pi, m in zip(self.proportions, self.slopes):
            out += pi * np.exp(m * x - m**2 / 2)
        return out

    def describe(self):
        return {"proportions": list(self.proportions), "slopes": list(self.slopes)}


def draw_study_data(spec, n1, n0, seed):
    """Presence from the mixture, background standard normal; area = 1.

    Feature-space convention: the dataset's domain_area is 1 and the fitted
    intercept absorbs it. Presence and background come from independent
    derived streams of ``seed``.
    """
    pres = draw_presence(spec, n1, make_rng(seed, 0))
    bg = make_rng(seed, 1).standard_normal(n0)
    return _study_dataset(pres, bg)


def draw_presence(spec, n1, rng):
    cum = np.cumsum(spec.proportions)
    comp = np.searchsorted(cum, rng.random(n1))
    means = np.asarray(spec.slopes)[np.minimum(comp, len(spec.slopes) - 1)]
    return means + rng.standard_normal(n1)


def _study_dataset(presence_x, background_x):
    X = np.concatenate([presence_x, background_x])[:, None]
    y = np.concatenate([np.ones(len(presence_x)), np.zeros(len(background_x))])
    return Dataset(X, y, domain_area=1.0)


# ---------------------------------------------------------------------------
# Population (infinite-sample) logistic-regression limit


def population_lr_limit(spec, ratio, quad_tol=QUAD_ABS_TOL):
    """Limiting (eta*, beta*) of unweighted logistic regression.

    Solves the population score equations E[(y - sigma(eta + beta x)) (1, x)]
    under the two-class sampling mixture with P(y=1) = ratio / (1 + ratio),
    by adaptive quadrature plus Newton. ``ratio`` is the limiting n1 / n0;
    ratio = 0 is the weighted-logistic / IPP limit where beta* = mu1 and
    eta* diverges to -infinity.
    """
    if ratio < 0 or not np.isfinite(ratio):
        raise ValueError("ratio must be a finite nonnegative number")
    if ratio == 0.0:
        return float("-inf"), spec.mu1

    pi1 = ratio / (1.0 + ratio)
    pi0 = 1.0 / (1.0 + ratio)
    lo, hi = QUAD_LIMITS

    def integrate(f):
        val, _ = quad(f, lo, hi, epsabs=quad_tol, epsrel=0.0, limit=200)
        return val

    def objective(theta):
        eta, beta = theta

        def sig(x):
            u = eta + beta * x
            if u >= 0:
                return 1.0 / (1.0 + math.exp(-u))
            e = math.exp(u)
            return e / (1.0 + e)

        def log_sig(x):
            u = eta + beta * x
            return u - _log1pexp(u)

        def log_1msig(x):
            return -_log1pexp(eta + beta * x)

        p1 = lambda x: float(spec.presence_density(x))
        p0 = lambda x: float(spec.background_density(x))

        value = pi1 * integrate(lambda x: p1(x) * log_sig(x)) + \
            pi0 * integrate(lambda x: p0(x) * log_1msig(x))
        g = np.array([
            pi1 * integrate(lambda x: p1(x) * (1 - sig(x)))
            - pi0 * integrate(lambda x: p0(x) * sig(x)),
            pi1 * integrate(lambda x: x * p1(x) * (1 - sig(x)))
            - pi0 * integrate(lambda x: x * p0(x) * sig(x)),
        ])

        def curv(x, k):
            s = sig(x)
            return x**k * s * (1 - s) * (pi1 * p1(x) + pi0 * p0(x))

        h00 = integrate(lambda x: curv(x, 0))
        h01 = integrate(lambda x: curv(x, 1))
        h11 = integrate(lambda x: curv(x, 2))
        hess = -np.array([[h00, h01], [h01, h11]])
        return value, g, hess

    start = np.array([math.log(ratio), spec.mu1])
    opts = OptimOptions(grad_tol=max(1e-12, quad_tol * 10), max_iter=100)
    theta, diag = newton_solve(objective, start, None, opts, n_unpenalized=2)
    if not diag.converged:
        raise NonConvergenceError("population score equations did not converge")
    return float(theta[0]), float(theta[1])


def _log1pexp(u):
    if u > 0:
        return u + math.log1p(math.exp(-u))
    return math.log1p(math.exp(u))


# ---------------------------------------------------------------------------
# The figure sweep: one fixed presence sample, fresh backgrounds per cell


ESTIMATORS = ("iwlr", "lr")


@dataclass(frozen=True)
class SweepCell:
    estimator: str
    n0: int
    replicate: int
    beta_hat: float
    converged: bool
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    spec: MixtureSpec1D
    n1: int
    n0_grid: tuple
    replicates: int
    estimators: tuple
    seed: int
    beta_limit: float
    cells: tuple = field(default_factory=tuple)

    def config(self):
        return {
            "n1": self.n1,
            "n0_grid": list(self.n0_grid),
            "replicates": self.replicates,
            "estimators": list(self.estimators),
            "seed": self.seed,
            "spec": self.spec.describe(),
        }

    def betas(self, estimator, n0):
        return np.array([c.beta_hat for c in self.cells
                         if c.estimator == estimator and c.n0 == n0
                         and c.converged])


def run_sweep(spec, n1=3000, n0_grid=DEFAULT_N0_GRID, replicates=20,
              estimators=ESTIMATORS, seed=17, opts=None, include_top=False):
    """Fit each estimator on one fixed presence sample against fresh
    backgrounds for every (n0, replicate) cell.

    Individual fit failures are recorded in their cell (beta_hat = nan) and
    the sweep continues. Cells are computed with derived seeds, so results
    are identical whether the sweep runs serially or in parallel; the
    PONLY_THREADS environment variable caps the worker count.
    """
    for est in estimators:
        if est not in ESTIMATORS:
            raise ValueError(f"unknown estimator {est!r}; choose from {ESTIMATORS}")
    n0_grid = tuple(int(v) for v in n0_grid)
    if include_top:
        n0_grid = n0_grid + (TOP_N0,)
    opts = opts or OptimOptions()

    presence = draw_presence(spec, n1, make_rng(seed, 0))
    tasks = [(i, n0, rep) for i, n0 in enumerate(n0_grid)
             for rep in range(replicates)]

    def run_cell(task):
        i, n0, rep = task
        bg = make_rng(seed, 1 + i, rep).standard_normal(n0)
        data = _study_dataset(presence, bg)
        out = []
        for est in estimators:
            try:
                if est == "iwlr":
                    fit = fit_iwlr(data, opts=opts)
                else:
                    fit = fit_logistic(data, W=1.0, opts=opts)
                out.append(SweepCell(est, n0, rep, float(fit.beta[0]), True))
            except FitError as exc:
                out.append(SweepCell(est, n0, rep, float("nan"), False, str(exc)))
        return task, out

    workers = _thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(run_cell, tasks))
    else:
        results = dict(map(run_cell, tasks))

    cells = []
    for est in estimators:
        for task in tasks:
            for cell in results[task]:
                if cell.estimator == est:
                    cells.append(cell)
    return SweepResult(
        spec=spec, n1=n1, n0_grid=n0_grid, replicates=replicates,
        estimators=tuple(estimators), seed=seed,
        beta_limit=population_lr_limit(spec, 0.0)[1], cells=tuple(cells),
    )


def _thread_cap():
    raw = os.environ.get("PONLY_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"PONLY_THREADS must be an integer, got {raw!r}") from None


def emit_figure_data(sweep, path_or_file, header_comments=()):
    """Write the sweep as long-format CSV:
    estimator, n0, replicate, beta_hat, beta_limit."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        for line in header_comments:
            f.write(f"# {line}\n")
        f.write("estimator,n0,replicate,beta_hat,beta_limit\n")
        for c in sweep.cells:
            f.write(f"{c.estimator},{c.n0},{c.replicate},"
                    f"{fmt(c.beta_hat)},{fmt(sweep.beta_limit)}\n")
    finally:
        if own:
            f.close()


def read_figure_data(path_or_file):
    """Read ``emit_figure_data`` output back into plain records."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "r", newline="") if own else path_or_file
    try:
        rows = []
        header = None
        for raw in f:
            if raw.lstrip().startswith("#") or not raw.strip():
                continue
            parts = raw.strip().split(",")
            if header is None:
                header = parts
                if header != ["estimator", "n0", "replicate", "beta_hat", "beta_limit"]:
                    raise ValueError(f"unexpected sweep CSV header: {header}")
                continue
            rows.append({
                "estimator": parts[0],
                "n0": int(parts[1]),
                "replicate": int(parts[2]),
                "beta_hat": float(parts[3]),
                "beta_limit": float(parts[4]),
            })
        return rows
    finally:
        if own:
            f.close()
