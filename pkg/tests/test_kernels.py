"""The compiled kernels must agree with the numpy reference."""

import numpy as np
import pytest

from ponly._kernels import _ref

try:
    from ponly._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled core not built")


def _case(seed, n, p):
    rng = np.random.default_rng(seed)
    u = rng.normal(-1.0, 1.5, n)
    w = rng.uniform(0.1, 2.0, n)
    y = (rng.random(n) < 0.3).astype(float)
    x = np.ascontiguousarray(rng.standard_normal((n, p)))
    return u, w, y, x


@needs_core
@pytest.mark.parametrize("n,p", [(1, 1), (17, 1), (1000, 3), (20000, 5)])
def test_exp_moments_matches_reference(n, p):
    u, w, _, x = _case(n, n, p)
    s0r, s1r, s2r, br = _ref.exp_moments(u, w, x)
    s0c, s1c, s2c, bc = _core.exp_moments(u, w, x)
    assert br == bc == -1
    assert np.isclose(s0c, s0r, rtol=1e-12)
    np.testing.assert_allclose(s1c, s1r, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(s2c, s2r, rtol=1e-12, atol=1e-14)


@needs_core
@pytest.mark.parametrize("n,p", [(17, 1), (1000, 3), (20000, 5)])
def test_logit_moments_matches_reference(n, p):
    u, w, y, x = _case(n + 1, n, p)
    ref = _ref.logit_moments(u, w, y, x)
    core = _core.logit_moments(u, w, y, x)
    for a, b in zip(ref, core):
        np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("mod", [m for m in (_ref, _core) if m is not None])
def test_exp_moments_overflow_reports_first_row(mod):
    u = np.array([0.0, 1.0, 701.0, 800.0])
    w = np.ones(4)
    x = np.ascontiguousarray(np.arange(4.0)[:, None])
    s0, s1, s2, bad = mod.exp_moments(u, w, x)
    assert bad == 2


@pytest.mark.parametrize("mod", [m for m in (_ref, _core) if m is not None])
def test_exp_moments_boundary_is_feasible(mod):
    u = np.array([700.0])
    w = np.ones(1)
    x = np.ones((1, 1))
    s0, s1, s2, bad = mod.exp_moments(u, w, x)
    assert bad == -1
    assert np.isfinite(s0)


@pytest.mark.parametrize("mod", [m for m in (_ref, _core) if m is not None])
def test_logit_moments_extreme_predictors_stay_finite(mod):
    u = np.array([-800.0, -40.0, 0.0, 40.0, 800.0])
    w = np.full(5, 1e12)
    y = np.array([0.0, 0.0, 1.0, 1.0, 1.0])
    x = np.ascontiguousarray(np.linspace(-1, 1, 5)[:, None])
    out = mod.logit_moments(u, w, y, x)
    for part in out:
        assert np.all(np.isfinite(part))
    # saturated rows contribute ~0; only the u=0 presence row is left
    assert np.isclose(out[0], -1e12 * np.log(2), rtol=1e-10)


@needs_core
def test_selected_backend_is_compiled():
    import ponly

    assert ponly.kernel_backend == "cython"
