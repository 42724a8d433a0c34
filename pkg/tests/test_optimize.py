import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize as scipy_minimize

from itisc.optimize import CONVERGED, LINE_SEARCH_FAILURE, MAX_ITER, GradientCheckError, check_gradient, minimize


def rosen(x):
    return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2


def rosen_grad(x):
    return np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2), 200 * (x[1] - x[0] ** 2)])


class TestMinimize:
    def test_quadratic(self):
        res = minimize(lambda x: x @ x, lambda x: 2 * x, [3.0, 4.0])
        assert res.status == CONVERGED
        assert np.abs(res.x).max() < 1e-8
        assert res.iterations <= 3

    def test_rosenbrock(self):
        res = minimize(rosen, rosen_grad, [-1.2, 1.0], tol=1e-8)
        assert res.success
        np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-5)

    def test_zero_gradient_start(self):
        res = minimize(lambda x: 1.0, lambda x: np.zeros_like(x), [0.3, -2.0])
        assert res.status == CONVERGED and res.iterations == 0
        np.testing.assert_array_equal(res.x, [0.3, -2.0])

    def test_max_iter(self):
        res = minimize(rosen, rosen_grad, [-1.2, 1.0], max_iter=3)
        assert res.status == MAX_ITER and res.iterations == 3

    def test_line_search_failure(self):
        # gradient pointing the wrong way: no step can satisfy sufficient decrease
        res = minimize(lambda x: float(x @ x), lambda x: -2 * x, [1.0, 1.0])
        assert res.status == LINE_SEARCH_FAILURE
        np.testing.assert_array_equal(res.x, [1.0, 1.0])

    def test_non_finite_start(self):
        with pytest.raises(ValueError):
            minimize(lambda x: np.nan, lambda x: x, [1.0])

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            minimize(lambda x: x @ x, lambda x: 2 * x, [1.0], tol=0.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_agrees_with_scipy(self, seed):
        g = np.random.default_rng(seed)
        A = g.normal(size=(6, 6))
        H = A @ A.T + np.eye(6)
        b = g.normal(size=6)

        def f(x):
            return 0.5 * x @ H @ x - b @ x + 0.1 * np.sum(x**4)

        def grad(x):
            return H @ x - b + 0.4 * x**3

        ours = minimize(f, grad, np.zeros(6), tol=1e-7)
        ref = scipy_minimize(f, np.zeros(6), jac=grad, method="L-BFGS-B", options={"gtol": 1e-10, "ftol": 0})
        assert ours.success
        np.testing.assert_allclose(ours.x, ref.x, atol=1e-6)

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=5))
    @settings(max_examples=50, deadline=None)
    def test_monotone_on_convex_quadratic(self, x0):
        x0 = np.array(x0)
        w = np.arange(1, x0.size + 1, dtype=float)
        res = minimize(lambda x: float(w @ x**2), lambda x: 2 * w * x, x0)
        assert res.f <= float(w @ x0**2)
        assert res.success


class TestGradientCheck:
    def test_correct_gradient(self):
        assert check_gradient(rosen, rosen_grad, np.array([0.5, 0.2])) < 1e-7

    def test_debug_flag_raises(self):
        with pytest.raises(GradientCheckError):
            minimize(rosen, lambda x: rosen_grad(x) * 2, [0.5, 0.2], debug=True)

    def test_debug_env(self, monkeypatch):
        monkeypatch.setenv("ITISC_DEBUG", "1")
        with pytest.raises(GradientCheckError):
            minimize(rosen, lambda x: -rosen_grad(x), [0.5, 0.2])
        monkeypatch.setenv("ITISC_DEBUG", "0")
        assert minimize(rosen, rosen_grad, [0.5, 0.2]).success
