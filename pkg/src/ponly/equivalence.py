"""Machine-checkable reports for the model-equivalence identities.

Tolerances separate roundoff from truncation: 1e-8 for exact algebraic
identities (Maxent/IPP slope equality, score residuals) and 1e-6 for the
finite-W weighted-logistic limit.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .optim import OptimOptions
from .penalties import Penalty
from .rng import make_rng
from .solvers import Standardizer, fit_ipp, fit_iwlr, fit_logistic, fit_maxent

PROP1_TOL = 1e-8
PROP2_TOL = 1e-6
SCORE_TOL = 1e-8


@dataclass(frozen=True)
class EquivalenceReport:
    check: str
    max_abs_diff: float
    tolerance: float
    passed: bool
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        # the pass flag is definitionally max_abs_diff <= tolerance
        assert self.passed == (self.max_abs_diff <= self.tolerance)

    def to_json_dict(self):
        return {
            "check": self.check,
            "max_abs_diff": self.max_abs_diff,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "provenance": self.provenance,
        }


def _report(check, diff, tol, provenance):
    return EquivalenceReport(check, float(diff), float(tol),
                             bool(diff <= tol), provenance)


def check_prop1(data, penalty=None, opts=None, tolerance=PROP1_TOL, provenance=None):
    """Maxent and IPP give identical slopes for any shared penalty on beta."""
    ipp = fit_ipp(data, penalty, opts)
    maxent = fit_maxent(data, penalty, opts)
    diff = float(np.max(np.abs(ipp.beta - maxent.beta)))
    prov = dict(provenance or {})
    prov["penalty"] = (penalty or Penalty.none()).describe()
    return _report("prop1_maxent_ipp", diff, tolerance, prov)


def check_prop2(data, penalty=None, opts=None, W=None, tolerance=PROP2_TOL,
                provenance=None):
    """Weighted logistic regression recovers the IPP fit as W grows.

    By default the W-escalation heuristic chooses W; passing a finite ``W``
    forces that weight (useful to demonstrate the finite-W gap). The report
    covers both the slope difference and the implied-intercept difference.
    """
    ipp = fit_ipp(data, penalty, opts)
    if W is None:
        wlr = fit_iwlr(data, penalty, opts)
    else:
        wlr = fit_logistic(data, W=W, penalty=penalty, opts=opts)
    dbeta = float(np.max(np.abs(ipp.beta - wlr.beta)))
    dalpha = abs(ipp.alpha - wlr.alpha)
    prov = dict(provenance or {})
    prov["penalty"] = (penalty or Penalty.none()).describe()
    prov["W"] = wlr.W
    prov["beta_diff"] = dbeta
    prov["alpha_diff"] = dalpha
    return _report("prop2_iwlr_ipp", max(dbeta, dalpha), tolerance, prov)


def check_scores(fit, data, tolerance=SCORE_TOL, provenance=None):
    """Score identities of the fitted IPP optimum.

    Evaluates both first-order conditions at the fit, scaled per presence
    record: the normalization residual (sum_i w_i e^{alpha+beta'x_i} - n1)/n1
    and the feature moment-matching residuals on the standardized scale.
    For an l1-penalized fit the moment residual of an active coefficient
    equals the penalty subgradient, so the check subtracts the minimum-norm
    subgradient of the penalty before comparing to the tolerance.
    """
    if fit.model not in ("ipp", "maxent", "poisson_llm"):
        raise ValueError(f"score identities apply to intensity fits, got {fit.model}")
    std = Standardizer.from_dataset(data)
    w = data.weights()
    u = fit.alpha + data.background_X @ fit.beta
    e = w * np.exp(u)
    n1 = data.n1

    norm_resid = abs(float(e.sum()) - n1) / n1

    Xb = std.transform(data.background_X)
    px = std.transform(data.presence_X).sum(axis=0)
    moment = (px - Xb.T @ e) / n1

    penalty = fit.penalty or Penalty.none()
    beta_std = fit.beta * std.scale
    l1w = penalty.l1_weights(data.p) / n1
    l2w = penalty.l2_weights(data.p) / n1
    resid = moment - l2w * beta_std
    pos, neg = beta_std > 0, beta_std < 0
    resid[pos] -= l1w[pos]
    resid[neg] += l1w[neg]
    at_zero = ~(pos | neg) & (l1w > 0)
    resid[at_zero] = np.sign(resid[at_zero]) * np.maximum(
        np.abs(resid[at_zero]) - l1w[at_zero], 0.0)
    moment_resid = float(np.max(np.abs(resid)))

    prov = dict(provenance or {})
    prov["normalization_residual"] = norm_resid
    prov["moment_residual"] = moment_resid
    prov["penalty"] = penalty.describe()
    return _report("score_identities", max(norm_resid, moment_resid),
                   tolerance, prov)


def check_eta_relation(fit, data, model, lambda_total, tolerance=0.1,
                       provenance=None):
    """Intercept relation between a logistic fit and the generating truth.

    For presence data from a correctly specified log-linear intensity with
    known intercept/slope and integrated intensity ``lambda_total``, the
    fitted logistic intercept approaches

        eta = alpha_true + log(n1 |D| / (n0 Lambda(D)))

    as the samples grow. For a W-weighted fit the implied-alpha mapping
    alpha = eta + log(W n0 / |D|) is used instead, which amounts to the same
    relation. Mixture (misspecified) truths are refused: the relation is not
    expected to hold there.
    """
    if model.kind != "log_linear":
        raise ValueError(
            "eta relation requires a correctly specified log-linear truth; "
            "got a mixture intensity")
    if fit.eta is None:
        raise ValueError("eta relation applies to logistic fits")
    _, alpha_true, _ = model.components[0]
    eta_expected = alpha_true + math.log(
        data.n1 * data.domain_area / (data.n0 * lambda_total))
    W = fit.W or 1.0
    eta_fit = fit.alpha - math.log(W * data.n0 / data.domain_area)
    diff = abs(eta_fit - eta_expected)
    prov = dict(provenance or {})
    prov["eta_expected"] = eta_expected
    prov["eta_fitted"] = eta_fit
    prov["W"] = W
    return _report("eta_relation", diff, tolerance, prov)


# ---------------------------------------------------------------------------
# The standard random-dataset verification sweep


def make_check_dataset(seed, index=0):
    """One random dataset for the verification sweep.

    Dimensions p in 1..5, n1 in [30, 200], n0 in [100, 2000] (inside the
    sweep's documented ranges but bounded away from sizes where complete
    separation becomes likely); background features standard normal,
    presence features shifted by a random offset in [-0.5, 0.5]^p.
    """
    from .dataset import Dataset

    rng = make_rng(seed, 100, index)
    p = int(rng.integers(1, 6))
    n1 = int(rng.integers(30, 201))
    n0 = int(rng.integers(100, 2001))
    shift = rng.uniform(-0.5, 0.5, size=p)
    Xp = shift + rng.standard_normal((n1, p))
    Xb = rng.standard_normal((n0, p))
    X = np.vstack([Xp, Xb])
    y = np.concatenate([np.ones(n1), np.zeros(n0)])
    area = float(rng.uniform(0.5, 4.0))
    return Dataset(X, y, area)


STANDARD_PENALTIES = (
    ("none", Penalty.none()),
    ("l2(0.3)", Penalty.l2(0.3)),
    ("l1(0.1)", Penalty.l1(0.1)),
)


def run_standard_checks(n_datasets=50, seed=20260810, opts=None,
                        tol_prop1=PROP1_TOL, tol_prop2=PROP2_TOL,
                        tol_scores=SCORE_TOL):
    """Prop-1 / Prop-2 / score checks over the standard random sweep.

    Yields EquivalenceReports: for each dataset, one prop1 and one prop2
    report per standard penalty plus one score report for the unpenalized
    IPP fit.
    """
    opts = opts or OptimOptions()
    for i in range(n_datasets):
        data = make_check_dataset(seed, i)
        prov = {"dataset_seed": seed, "dataset_index": i,
                "n1": data.n1, "n0": data.n0, "p": data.p}
        for label, pen in STANDARD_PENALTIES:
            yield check_prop1(data, pen, opts, tol_prop1, dict(prov))
            yield check_prop2(data, pen, opts, tolerance=tol_prop2,
                              provenance=dict(prov))
        fit = fit_ipp(data, None, opts)
        yield check_scores(fit, data, tol_scores, dict(prov))
