import numpy as np
import pytest

from beamlab import build_grid
from beamlab.grids import GridError


def test_nodes_ascend_with_exact_endpoints():
    g = build_grid(16, 0.25, 0.75)
    assert g.nodes[0] == 0.25 and g.nodes[-1] == 0.75
    assert np.all(np.diff(g.nodes) > 0)


def test_derivative_of_constant():
    g = build_grid(16, 0.0, 0.5)
    assert np.max(np.abs(g.d1 @ np.ones(16))) <= 1e-13


def test_derivative_of_x_squared():
    g = build_grid(16, 0.0, 0.5)
    x = g.nodes
    assert np.max(np.abs(g.d1 @ x**2 - 2 * x)) <= 1e-12


def test_higher_derivatives_polynomial_exactness():
    g = build_grid(20, 0.0, 0.5)
    x = g.nodes
    # absolute scales grow like the operator norms; tolerances follow
    assert np.max(np.abs(g.d2 @ x**3 - 6 * x)) <= 1e-10
    assert np.max(np.abs(g.d3 @ x**4 - 24 * x)) <= 1e-8
    assert np.max(np.abs(g.d4 @ x**4 - 24.0)) <= 1e-6


def test_random_polynomial_differentiation():
    rng = np.random.default_rng(3)
    g = build_grid(24, 0.0, 0.5)
    for _ in range(5):
        coeffs = rng.standard_normal(10)
        p = np.polynomial.Polynomial(coeffs)
        assert np.max(np.abs(g.d1 @ p(g.nodes) - p.deriv()(g.nodes))) <= 1e-10
        assert np.max(np.abs(g.d2 @ p(g.nodes) - p.deriv(2)(g.nodes))) <= 1e-8


def test_quad_weights_sum_to_length():
    g = build_grid(16, 0.5, 1.0)
    assert abs(np.sum(g.quad_weights) - 0.5) <= 1e-13
    assert np.all(g.quad_weights > 0)


def test_quad_weights_integrate_polynomials():
    g = build_grid(12, 0.5, 1.0)
    # exact for the interpolant, hence for degree <= n-1
    exact = (1.0**4 - 0.5**4) / 4.0
    assert abs(g.integrate(g.nodes**3) - exact) <= 1e-14


def test_mass_matrix_exact_polynomial_inner_products():
    g = build_grid(14, 0.0, 0.5)
    x = g.nodes
    # integral of x^3 * x^4 over [0, 1/2] equals (1/2)^8 / 8
    assert abs(g.inner(x**3, x**4) - 0.5**8 / 8.0) <= 1e-15
    assert abs(g.inner(np.ones(14), np.ones(14)) - 0.5) <= 1e-14


def test_mass_matrix_spd():
    g = build_grid(16, 0.0, 0.5)
    eigs = np.linalg.eigvalsh(g.mass)
    assert eigs[0] > 0
    assert np.max(np.abs(g.mass_chol.T @ g.mass_chol - g.mass)) <= 1e-14


def test_antiderivatives():
    g = build_grid(16, 0.0, 0.5)
    x = g.nodes
    left = g.antiderivative_from_left(x**2)
    assert np.max(np.abs(left - x**3 / 3.0)) <= 1e-15
    right = g.antiderivative_from_right(x**2)
    assert np.max(np.abs(right - (x**3 - 0.5**3) / 3.0)) <= 1e-15
    assert abs(right[-1]) <= 1e-18


def test_grid_errors():
    with pytest.raises(GridError, match="at least 8"):
        build_grid(4, 0.0, 1.0)
    with pytest.raises(GridError, match="empty subinterval"):
        build_grid(16, 1.0, 1.0)
