"""Likelihood values, exact derivatives, concavity, and cross-identities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fd_gradient, fd_jacobian, random_dataset, rel_err
from ponly import (Dataset, Domain1D, InfeasiblePointError, bin_presence,
                   grid_centers, ipp_loglik, logistic_loglik, maxent_loglik,
                   poisson_llm_loglik)
from ponly.likelihoods import BinnedCounts
from ponly.rng import make_rng

FD_TOL = 1e-6


def _points(seed, p, n=20, scale=0.5):
    rng = make_rng(seed, 77)
    return rng.normal(0.0, scale, size=(n, p + 1))


class TestIppLoglik:
    def test_value_at_zero_is_minus_area(self):
        d = random_dataset(1, area=1.0)
        ev = ipp_loglik(0.0, np.zeros(d.p), d)
        assert np.isclose(ev.value, -1.0)

    def test_presence_terms_add_linearly(self):
        d = random_dataset(2)
        ev = ipp_loglik(0.3, np.zeros(d.p), d)
        want = d.n1 * 0.3 - d.domain_area * np.exp(0.3)
        assert np.isclose(ev.value, want)

    @pytest.mark.parametrize("k", range(20))
    def test_gradient_and_hessian_match_finite_differences(self, k):
        d = random_dataset(50 + k, n1=30, n0=80, p=2)
        th = _points(k, d.p, n=1)[0]

        def value(t):
            return ipp_loglik(t[0], t[1:], d).value

        def grad(t):
            return ipp_loglik(t[0], t[1:], d).gradient

        ev = ipp_loglik(th[0], th[1:], d)
        assert rel_err(fd_gradient(value, th), ev.gradient) < FD_TOL
        assert rel_err(fd_jacobian(grad, th), ev.hessian) < FD_TOL

    def test_overflow_names_offending_row(self):
        X = np.array([[0.0], [1.0], [900.0]])
        d = Dataset(X, [1, 0, 0], 1.0)
        with pytest.raises(InfeasiblePointError) as err:
            ipp_loglik(0.0, np.ones(1), d)
        assert err.value.row == 2

    def test_quad_weights_enter_background_sum(self):
        X = np.array([[0.0], [0.5], [1.0]])
        w = np.array([0.25, 0.75])
        d = Dataset(X, [1, 0, 0], 1.0, quad_weights=w)
        ev = ipp_loglik(0.0, np.ones(1), d)
        want = 0.0 - (0.25 * np.exp(0.5) + 0.75 * np.exp(1.0))
        assert np.isclose(ev.value, want)


class TestMaxentLoglik:
    def test_value_at_zero(self):
        d = random_dataset(3, area=2.5)
        ev = maxent_loglik(np.zeros(d.p), d)
        assert np.isclose(ev.value, -d.n1 * np.log(2.5))

    @pytest.mark.parametrize("k", range(20))
    def test_gradient_and_hessian_match_finite_differences(self, k):
        d = random_dataset(150 + k, n1=25, n0=60, p=3)
        th = _points(100 + k, d.p - 1, n=1)[0]

        ev = maxent_loglik(th, d)
        fd_g = fd_gradient(lambda b: maxent_loglik(b, d).value, th)
        fd_h = fd_jacobian(lambda b: maxent_loglik(b, d).gradient, th)
        assert rel_err(fd_g, ev.gradient) < FD_TOL
        assert rel_err(fd_h, ev.hessian) < FD_TOL

    def test_profile_identity_with_ipp(self):
        # partially maximizing the ipp objective over the intercept turns
        # its slope gradient into the maxent slope gradient
        d = random_dataset(4, p=2)
        for k in range(20):
            beta = _points(200 + k, d.p, n=1)[0][1:]
            s0 = float(d.weights() @ np.exp(d.background_X @ beta))
            alpha_star = np.log(d.n1) - np.log(s0)
            gm = maxent_loglik(beta, d).gradient
            gi = ipp_loglik(alpha_star, beta, d).gradient
            np.testing.assert_allclose(gi[1:], gm, rtol=1e-9, atol=1e-9)


class TestLogisticLoglik:
    def test_value_at_zero(self):
        d = random_dataset(5)
        for W in (1.0, 7.0):
            ev = logistic_loglik(0.0, np.zeros(d.p), d, W=W)
            assert np.isclose(ev.value, -(d.n1 + W * d.n0) * np.log(2))

    @pytest.mark.parametrize("k", range(20))
    def test_gradient_and_hessian_match_finite_differences(self, k):
        d = random_dataset(250 + k, n1=30, n0=70, p=2)
        th = _points(300 + k, d.p, n=1)[0]
        W = 1.0 if k % 2 else 25.0

        ev = logistic_loglik(th[0], th[1:], d, W=W)
        fd_g = fd_gradient(lambda t: logistic_loglik(t[0], t[1:], d, W=W).value, th)
        fd_h = fd_jacobian(lambda t: logistic_loglik(t[0], t[1:], d, W=W).gradient, th)
        assert rel_err(fd_g, ev.gradient) < FD_TOL
        assert rel_err(fd_h, ev.hessian) < FD_TOL

    def test_gradient_splits_into_residual_sums(self):
        d = random_dataset(6)
        eta, beta = 0.2, np.full(d.p, -0.3)
        ev = logistic_loglik(eta, beta, d, W=1.0)
        mu = 1 / (1 + np.exp(-(eta + d.X @ beta)))
        r = d.y - mu
        assert np.isclose(ev.gradient[0], r.sum())
        np.testing.assert_allclose(ev.gradient[1:], d.X.T @ r)

    def test_rescaled_intercept_approaches_ipp_as_weight_grows(self):
        # at alpha = eta + log(W n0 / |D|) the weighted objective converges
        # to the ipp objective; the gap shrinks like 1/W
        d = random_dataset(7)
        alpha, beta = 0.4, np.full(d.p, 0.2)
        ipp = ipp_loglik(alpha, beta, d).value
        gaps = []
        for W in (1e2, 1e3, 1e4):
            eta = alpha - np.log(W * d.n0 / d.domain_area)
            wlr = logistic_loglik(eta, beta, d, W=W).value
            const = d.n1 * np.log(W * d.n0 / d.domain_area)
            gaps.append(abs(wlr + const - ipp))
        assert gaps[1] < 0.15 * gaps[0]
        assert gaps[2] < 0.15 * gaps[1]

    def test_weight_below_one_rejected(self):
        d = random_dataset(8)
        with pytest.raises(ValueError, match="W"):
            logistic_loglik(0.0, np.zeros(d.p), d, W=0.5)


class TestPoissonLlm:
    def test_single_presence_two_cells(self):
        binned = BinnedCounts(counts=np.array([1, 0]), cell_area=0.5)
        ev = poisson_llm_loglik(0.0, np.zeros(1), binned, np.array([[0.1], [0.9]]))
        assert np.isclose(ev.value, -1.0)

    def test_equals_ipp_when_presence_sits_on_cells(self):
        # presence features equal their cell's features: the two
        # objectives coincide as functions
        dom = Domain1D(0, 1)
        cells = grid_centers(dom, 16)
        rng = make_rng(11)
        pres = cells[rng.integers(0, 16, size=9)]
        binned = bin_presence(pres, cells, dom)
        data = Dataset(np.vstack([pres, cells]),
                       np.r_[np.ones(9), np.zeros(16)], dom.area)
        for k in range(10):
            a, b = make_rng(12, k).normal(0, 0.8, size=2)
            ev_llm = poisson_llm_loglik(a, [b], binned, cells)
            ev_ipp = ipp_loglik(a, [b], data)
            assert np.isclose(ev_llm.value, ev_ipp.value, rtol=1e-12)
            np.testing.assert_allclose(ev_llm.gradient, ev_ipp.gradient,
                                       rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("k", range(20))
    def test_gradient_and_hessian_match_finite_differences(self, k):
        dom = Domain1D(0, 2)
        cells = grid_centers(dom, 25)
        rng = make_rng(13, k)
        counts = rng.multinomial(40, np.full(25, 1 / 25))
        binned = BinnedCounts(counts=counts, cell_area=dom.area / 25)
        th = _points(400 + k, 1, n=1)[0]

        ev = poisson_llm_loglik(th[0], th[1:], binned, cells)
        fd_g = fd_gradient(
            lambda t: poisson_llm_loglik(t[0], t[1:], binned, cells).value, th)
        fd_h = fd_jacobian(
            lambda t: poisson_llm_loglik(t[0], t[1:], binned, cells).gradient, th)
        assert rel_err(fd_g, ev.gradient) < FD_TOL
        assert rel_err(fd_h, ev.hessian) < FD_TOL


class TestSharedShape:
    def test_hessians_symmetric_and_concave(self):
        d = random_dataset(9, p=3)
        for k in range(10):
            th = _points(500 + k, d.p, n=1)[0]
            for ev in (ipp_loglik(th[0], th[1:], d),
                       maxent_loglik(th[1:], d),
                       logistic_loglik(th[0], th[1:], d, W=3.0)):
                np.testing.assert_allclose(ev.hessian, ev.hessian.T, atol=1e-12)
                eigs = np.linalg.eigvalsh(-ev.hessian)
                assert eigs.min() > -1e-10

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10**6), t=st.floats(0.05, 0.95))
    def test_midpoint_concavity_along_random_segments(self, seed, t):
        d = random_dataset(10, n1=20, n0=50, p=2)
        rng = make_rng(seed)
        a = rng.normal(0, 0.6, size=d.p + 1)
        b = rng.normal(0, 0.6, size=d.p + 1)
        mid = t * a + (1 - t) * b

        for f in (lambda th: ipp_loglik(th[0], th[1:], d).value,
                  lambda th: logistic_loglik(th[0], th[1:], d, W=2.0).value,
                  lambda th: maxent_loglik(th[1:], d).value):
            assert f(mid) >= t * f(a) + (1 - t) * f(b) - 1e-9


class TestBinPresence:
    def test_nearest_cell(self):
        dom = Domain1D(0, 1)
        cells = grid_centers(dom, 4)
        out = bin_presence(np.array([[0.13]]), cells, dom)
        np.testing.assert_array_equal(out.counts, [1, 0, 0, 0])

    def test_tie_goes_to_lower_index(self):
        dom = Domain1D(0, 1)
        cells = grid_centers(dom, 4)
        # 0.25 sits exactly between the centers 0.125 and 0.375
        out = bin_presence(np.array([[0.25]]), cells, dom)
        np.testing.assert_array_equal(out.counts, [1, 0, 0, 0])

    def test_counts_sum_to_presence_count(self):
        dom = Domain1D(0, 1)
        cells = grid_centers(dom, 16)
        pts = make_rng(14).random((137, 1))
        out = bin_presence(pts, cells, dom)
        assert out.counts.sum() == 137

    def test_uniform_points_spread_multinomially(self):
        dom = Domain1D(0, 1)
        cells = grid_centers(dom, 10)
        pts = make_rng(15).random((1000, 1))
        out = bin_presence(pts, cells, dom)
        # each count is Binomial(1000, 1/10): 4 sigma = 4 sqrt(90)
        assert np.all(np.abs(out.counts - 100) < 4 * np.sqrt(90))

    def test_respects_background_row_order(self):
        dom = Domain1D(0, 1)
        cells = grid_centers(dom, 4)[::-1].copy()  # reversed but still a grid
        out = bin_presence(np.array([[0.13]]), cells, dom)
        np.testing.assert_array_equal(out.counts, [0, 0, 0, 1])

    def test_non_grid_background_rejected(self):
        dom = Domain1D(0, 1)
        pts = make_rng(16).random((8, 1))
        with pytest.raises(ValueError, match="regular grid"):
            bin_presence(np.array([[0.5]]), pts, dom)

    def test_2d_binning(self):
        from ponly import Domain2D

        dom = Domain2D(0, 1, 0, 1)
        cells = grid_centers(dom, 9)
        out = bin_presence(np.array([[0.1, 0.1], [0.9, 0.9], [0.5, 0.52]]),
                           cells, dom)
        assert out.counts.sum() == 3
        assert out.counts[0] == 1 and out.counts[-1] == 1 and out.counts[4] == 1
