"""Presence-only species distribution estimators and their equivalences.

Fits the numerical inhomogeneous-Poisson-process model, Maxent, (weighted)
logistic regression, and the discretized Poisson log-linear model on a
shared dataset abstraction, with packaged checks that the estimators agree
where they provably must, and a simulation study of how they diverge under
misspecification.
"""

from ._kernels import BACKEND as kernel_backend
from .dataset import Dataset, read_csv, write_csv
from .domain import Domain1D, Domain2D
from .errors import (FitError, InfeasiblePointError, ModelInvalidError,
                     NonConvergenceError, RankDeficiencyError)
from .equivalence import (EquivalenceReport, check_eta_relation, check_prop1,
                          check_prop2, check_scores, run_standard_checks)
from .intensity import IntensityModel, ThinningModel
from .likelihoods import (BinnedCounts, ObjectiveEval, bin_presence,
                          ipp_loglik, logistic_loglik, maxent_loglik,
                          poisson_llm_loglik)
from .optim import Diagnostics, OptimOptions, newton_solve
from .penalties import Penalty
from .rng import make_rng
from .sampling import (assemble_dataset, grid_centers, identity_features,
                       quadratic_features, sample_background, simulate_ipp,
                       thin_process)
from .simstudy import (MixtureSpec1D, SweepResult, draw_study_data,
                       emit_figure_data, population_lr_limit, read_figure_data,
                       run_sweep)
from .solvers import (ModelFit, fit_ipp, fit_iwlr, fit_logistic, fit_maxent,
                      fit_poisson_llm)

__version__ = "0.1.0"

__all__ = [
    "BinnedCounts", "Dataset", "Diagnostics", "Domain1D", "Domain2D",
    "EquivalenceReport", "FitError", "InfeasiblePointError", "IntensityModel",
    "MixtureSpec1D", "ModelFit", "ModelInvalidError", "NonConvergenceError",
    "ObjectiveEval", "OptimOptions", "Penalty", "RankDeficiencyError",
    "SweepResult", "ThinningModel", "assemble_dataset", "bin_presence",
    "check_eta_relation", "check_prop1", "check_prop2", "check_scores",
    "draw_study_data", "emit_figure_data", "fit_ipp", "fit_iwlr",
    "fit_logistic", "fit_maxent", "fit_poisson_llm", "grid_centers",
    "identity_features", "ipp_loglik", "kernel_backend", "logistic_loglik",
    "make_rng", "maxent_loglik", "newton_solve", "poisson_llm_loglik",
    "population_lr_limit", "quadratic_features", "read_csv",
    "read_figure_data", "run_standard_checks", "run_sweep",
    "sample_background", "simulate_ipp", "thin_process", "write_csv",
]
