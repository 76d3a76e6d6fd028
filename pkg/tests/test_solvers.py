"""Solver engine unit tests and model-fit behavior."""

import numpy as np
import pytest

from conftest import random_dataset
from ponly import (Dataset, Domain1D, NonConvergenceError, OptimOptions,
                   Penalty, RankDeficiencyError, bin_presence, fit_ipp,
                   fit_iwlr, fit_logistic, fit_maxent, fit_poisson_llm,
                   grid_centers, maxent_loglik, newton_solve, simulate_ipp)
from ponly.intensity import IntensityModel
from ponly.rng import make_rng

GOLDEN = (np.sqrt(5) - 1) / 2


def golden_section_max(f, lo, hi, tol=1e-12):
    """Scalar maximizer by golden-section search (independent oracle)."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


class TestNewtonEngine:
    def test_quadratic_in_two_steps(self):
        def obj(th):
            x = th[0]
            return -((x - 3.0) ** 2), np.array([-2 * (x - 3.0)]), np.array([[-2.0]])

        theta, diag = newton_solve(obj, np.zeros(1), n_unpenalized=1)
        assert diag.converged and diag.iterations <= 2
        assert abs(theta[0] - 3.0) < 1e-12

    def test_l1_threshold_pins_coefficient_at_zero(self):
        # slope of -(x-3)^2 at 0 is 6; a threshold above it wins
        def obj(th):
            x = th[0]
            return -((x - 3.0) ** 2), np.array([-2 * (x - 3.0)]), np.array([[-2.0]])

        theta, diag = newton_solve(obj, np.zeros(1), Penalty.l1(7.0),
                                   n_unpenalized=0)
        assert diag.converged
        assert theta[0] == 0.0

        theta, _ = newton_solve(obj, np.zeros(1), Penalty.l1(2.0),
                                n_unpenalized=0)
        assert abs(theta[0] - 2.0) < 1e-10  # soft-threshold fixed point 3 - 2/2

    @pytest.mark.parametrize("k", range(12))
    def test_matches_golden_section_on_random_concave_objectives(self, k):
        rng = make_rng(600, k)
        a = rng.uniform(0.5, 3.0)
        b = rng.uniform(-2.0, 2.0)
        c = rng.uniform(0.1, 2.0)

        def f(x):
            return -a * (x - b) ** 2 - c * np.cosh(x - b)

        def obj(th):
            x = th[0]
            val = f(x)
            g = -2 * a * (x - b) - c * np.sinh(x - b)
            h = -2 * a - c * np.cosh(x - b)
            return val, np.array([g]), np.array([[h]])

        theta, _ = newton_solve(obj, np.zeros(1), n_unpenalized=1)
        oracle = golden_section_max(f, b - 5, b + 5)
        assert abs(theta[0] - oracle) < 1e-8

    def test_iteration_budget_enforced(self):
        def obj(th):
            x = th[0]
            return -(x**4), np.array([-4 * x**3]), np.array([[-12 * x**2 - 1e-12]])

        with pytest.raises(NonConvergenceError):
            newton_solve(obj, np.ones(1), opts=OptimOptions(max_iter=3))


class TestFitIpp:
    def test_symmetric_toy_has_zero_slope(self):
        data = Dataset(np.array([[0.0], [-1.0], [1.0]]), [1, 0, 0], 1.0)
        fit = fit_ipp(data)
        assert abs(fit.beta[0]) < 1e-12
        assert abs(fit.alpha - np.log(data.n1)) < 1e-12

    def test_scalar_fit_matches_golden_section_oracle(self):
        X = np.array([[0.42], [-0.1], [0.3], [-1.2], [0.8]])
        data = Dataset(X, [1, 1, 0, 0, 0], 1.0)
        fit = fit_ipp(data)
        oracle = golden_section_max(
            lambda b: maxent_loglik(np.array([b]), data).value, -10, 10)
        assert abs(fit.beta[0] - oracle) < 1e-7

    def test_normalization_and_moment_conditions(self):
        data = random_dataset(21, n1=60, n0=400, p=3)
        fit = fit_ipp(data)
        e = data.weights() * np.exp(fit.alpha + data.background_X @ fit.beta)
        assert abs(e.sum() - data.n1) < 1e-8 * data.n1
        bg_mean = (data.background_X.T @ e) / e.sum()
        pres_mean = data.presence_X.mean(axis=0)
        np.testing.assert_allclose(bg_mean, pres_mean, atol=1e-8)

    def test_scale_equivariance(self):
        data = random_dataset(22, p=2)
        c = 37.5
        X2 = data.X.copy()
        X2[:, 1] *= c
        data2 = Dataset(X2, data.y, data.domain_area)
        f1, f2 = fit_ipp(data), fit_ipp(data2)
        assert abs(f2.beta[1] - f1.beta[1] / c) < 1e-8
        assert abs(f2.beta[0] - f1.beta[0]) < 1e-8
        assert abs(f2.alpha - f1.alpha) < 1e-8
        np.testing.assert_allclose(f2.fitted, f1.fitted, rtol=1e-8)

    def test_separable_data_raises_with_direction(self):
        Xp = 1.0 + make_rng(23).random((20, 1))
        Xb = -1.0 - make_rng(24).random((50, 1))
        data = Dataset(np.vstack([Xp, Xb]),
                       np.r_[np.ones(20), np.zeros(50)], 1.0)
        with pytest.raises(NonConvergenceError) as err:
            fit_ipp(data)
        assert err.value.direction is not None

    def test_constant_feature_raises_rank_deficiency(self):
        rng = make_rng(25)
        X = np.column_stack([rng.standard_normal(40), np.ones(40)])
        y = np.r_[np.ones(10), np.zeros(30)]
        with pytest.raises(RankDeficiencyError):
            fit_ipp(Dataset(X, y, 1.0))

    def test_l2_penalty_shrinks_slope(self):
        data = random_dataset(26, p=1)
        free = fit_ipp(data)
        shrunk = fit_ipp(data, Penalty.l2(5.0))
        assert abs(shrunk.beta[0]) < abs(free.beta[0])
        # intercept stays unpenalized: normalization still holds
        e = data.weights() * np.exp(shrunk.alpha + data.background_X @ shrunk.beta)
        assert abs(e.sum() - data.n1) < 1e-8 * data.n1

    def test_l1_penalty_can_zero_out_weak_feature(self):
        data = random_dataset(27, n1=30, n0=200, p=3, shift=0.05)
        # threshold above the slope scores at zero pins every coefficient
        grad0 = np.abs(maxent_loglik(np.zeros(3), data).gradient).max()
        fit = fit_ipp(data, Penalty.l1(2.0 * grad0))
        assert np.all(fit.beta == 0.0)


class TestFitMaxent:
    def test_alpha_backfill_normalizes_intensity_exactly(self):
        data = random_dataset(31, p=2)
        fit = fit_maxent(data)
        e = data.weights() * np.exp(fit.alpha + data.background_X @ fit.beta)
        assert abs(e.sum() - data.n1) < 1e-12 * data.n1

    def test_zero_slope_dataset_backfills_log_n1_over_area(self):
        data = Dataset(np.array([[0.0], [-1.0], [1.0]]), [1, 0, 0], 1.0)
        fit = fit_maxent(data)
        assert abs(fit.beta[0]) < 1e-12
        assert abs(fit.alpha - 0.0) < 1e-10


class TestFitLogistic:
    def test_balanced_symmetric_data_centers_at_zero(self):
        a = 0.7
        rng = make_rng(41)
        Xp = a + rng.standard_normal((50, 1))
        Xb = np.vstack([-Xp])  # exact mirror
        data = Dataset(np.vstack([Xp, Xb]), np.r_[np.ones(50), np.zeros(50)], 1.0)
        fit = fit_logistic(data, W=1.0)
        assert abs(fit.eta) < 1e-9

    def test_implied_alpha_mapping(self):
        data = random_dataset(42)
        fit = fit_logistic(data, W=5.0)
        want = fit.eta + np.log(5.0 * data.n0 / data.domain_area)
        assert np.isclose(fit.alpha, want)

    def test_fitted_probabilities_range_and_residual_balance(self):
        data = random_dataset(43)
        fit = fit_logistic(data, W=1.0)
        assert np.all((fit.fitted > 0) & (fit.fitted < 1))
        assert abs(np.sum(data.y - fit.fitted)) < 1e-7
        # residuals orthogonal to features at the optimum
        np.testing.assert_allclose(data.X.T @ (data.y - fit.fitted),
                                   0.0, atol=1e-6)


class TestFitIwlr:
    def test_matches_ipp_well_inside_tolerance(self):
        data = random_dataset(51, n1=80, n0=300, p=2)
        ipp = fit_ipp(data)
        iw = fit_iwlr(data)
        assert np.max(np.abs(iw.beta - ipp.beta)) < 1e-6
        assert abs(iw.alpha - ipp.alpha) < 1e-6
        assert iw.extras["rounds"] <= 2

    def test_symmetric_toy_slope_zero(self):
        data = Dataset(np.array([[0.0], [-1.0], [1.0]]), [1, 0, 0], 1.0)
        fit = fit_iwlr(data)
        assert abs(fit.beta[0]) < 1e-10

    def test_unbalanced_shape_still_two_rounds(self):
        # many presences against few background points stresses the
        # finite-W error constant
        rng = make_rng(52)
        Xp = 0.4 + rng.standard_normal((200, 2))
        Xb = rng.standard_normal((12, 2))
        data = Dataset(np.vstack([Xp, Xb]), np.r_[np.ones(200), np.zeros(12)], 1.0)
        ipp = fit_ipp(data)
        iw = fit_iwlr(data)
        assert np.max(np.abs(iw.beta - ipp.beta)) < 1e-6
        assert iw.extras["rounds"] <= 2

    def test_penalized_variant_agrees_too(self):
        data = random_dataset(53, p=3)
        pen = Penalty.l2(0.4)
        ipp = fit_ipp(data, pen)
        iw = fit_iwlr(data, pen)
        assert np.max(np.abs(iw.beta - ipp.beta)) < 1e-6


class TestFitPoissonLlm:
    def test_identical_to_ipp_on_coincident_features(self):
        dom = Domain1D(0, 1)
        cells = grid_centers(dom, 32)
        rng = make_rng(61)
        pres = cells[rng.integers(0, 32, size=60)]
        binned = bin_presence(pres, cells, dom)
        data = Dataset(np.vstack([pres, cells]),
                       np.r_[np.ones(60), np.zeros(32)], dom.area)
        llm = fit_poisson_llm(binned, cells, dom.area)
        ipp = fit_ipp(data)
        assert abs(llm.beta[0] - ipp.beta[0]) < 1e-10
        assert abs(llm.alpha - ipp.alpha) < 1e-10

    def test_discretization_error_vanishes_with_finer_grids(self):
        dom = Domain1D(0, 1)
        model = IntensityModel.log_linear(np.log(800), [1.0])
        pres = simulate_ipp(model, dom, seed=62)
        diffs = []
        for n_cells in (100, 1000, 10000):
            cells = grid_centers(dom, n_cells)
            binned = bin_presence(pres, cells, dom)
            data = Dataset(np.vstack([pres, cells]),
                           np.r_[np.ones(len(pres)), np.zeros(n_cells)],
                           dom.area)
            llm = fit_poisson_llm(binned, cells, dom.area)
            ipp = fit_ipp(data)
            diffs.append(abs(llm.beta[0] - ipp.beta[0]))
        assert diffs[0] > diffs[1] > diffs[2]
        assert diffs[2] < 1e-3

    def test_single_cell_is_rank_deficient(self):
        dom = Domain1D(0, 1)
        cells = grid_centers(dom, 1)
        binned = bin_presence(np.array([[0.4]]), cells, dom)
        with pytest.raises(RankDeficiencyError):
            fit_poisson_llm(binned, cells, dom.area)


class TestSharedContracts:
    def test_converged_fits_meet_tolerance(self):
        data = random_dataset(71)
        opts = OptimOptions()
        for fit in (fit_ipp(data, opts=opts), fit_maxent(data, opts=opts),
                    fit_logistic(data, W=2.0, opts=opts)):
            assert fit.converged
            assert fit.grad_norm <= opts.grad_tol

    def test_fits_do_not_mutate_data(self):
        data = random_dataset(72)
        before = data.X.copy()
        fit_ipp(data)
        fit_iwlr(data)
        np.testing.assert_array_equal(data.X, before)

    def test_json_dict_has_contracted_keys(self):
        data = random_dataset(73)
        doc = fit_ipp(data).to_json_dict()
        assert list(doc) == ["model", "alpha", "eta", "beta", "W", "converged",
                             "iterations", "grad_norm", "n1", "n0",
                             "domain_area", "seed"]
