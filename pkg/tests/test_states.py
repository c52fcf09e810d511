import numpy as np
import pytest

from beamlab import build_grid
from beamlab.states import (
    DimensionError,
    StateVector,
    check_domain_membership,
    constraint_residuals,
)

ELL0, ELL = 0.5, 1.0


@pytest.fixture(scope="module")
def grids():
    return build_grid(24, 0.0, ELL0), build_grid(24, ELL0, ELL)


def matched_cubic_coeffs(value, slope):
    """Cubic a (x-ell)^3 + b (x-ell)^2 matching value/slope at ell0.

    Independent oracle: solve the two matching conditions directly (the
    clamping at ell is built into the ansatz).
    """
    d = ELL0 - ELL
    mat = np.array([[d**3, d**2], [3 * d**2, 2 * d]])
    return np.linalg.solve(mat, np.array([value, slope]))


def manufactured_state(grids):
    left, right = grids
    v = left.nodes**2
    a, b = matched_cubic_coeffs(ELL0**2, 2 * ELL0)
    w = a * (right.nodes - ELL) ** 3 + b * (right.nodes - ELL) ** 2
    zero_l = np.zeros(left.n)
    zero_r = np.zeros(right.n)
    return StateVector(v_vals=v + 0j, V_vals=zero_l + 0j, w_vals=w + 0j, W_vals=zero_r + 0j), (a, b)


def test_cubic_oracle_frozen_values():
    # for ell0 = 0.5, ell = 1 the matching cubic is 8 (x-1)^3 + 5 (x-1)^2
    a, b = matched_cubic_coeffs(0.25, 1.0)
    assert abs(a - 8.0) < 1e-13
    assert abs(b - 5.0) < 1e-13


def test_zero_state_all_zero(grids):
    left, right = grids
    z = StateVector.zero(left.n, right.n)
    for which in ("state-space", "generator-domain"):
        rows = check_domain_membership(z, left, right, which, tol=0.0)
        assert all(res == 0.0 and ok for _, res, ok in rows)


def test_manufactured_state_space_membership(grids):
    left, right = grids
    z, _ = manufactured_state(grids)
    res = constraint_residuals(z, left, right, "state-space")
    assert np.max(res) <= 1e-12


def test_manufactured_generator_domain_gap(grids):
    # v_xx(ell0) = 2 while the cubic has w_xx(ell0) = 48 (ell0 - ell) + 10 = -14,
    # so the curvature-matching residual must be 16 (symbolic differentiation
    # of the manufactured polynomials)
    left, right = grids
    z, (a, b) = manufactured_state(grids)
    w_xx_interface = 6 * a * (ELL0 - ELL) + 2 * b
    expected = abs(2.0 - w_xx_interface)
    assert abs(expected - 16.0) < 1e-12
    rows = check_domain_membership(z, left, right, "generator-domain", tol=1e-10)
    by_name = {name: res for name, res, _ in rows}
    assert abs(by_name["v_xx(ell0)-w_xx(ell0)"] - expected) < 1e-9
    assert not all(ok for _, _, ok in rows)


def test_unit_modulus_invariance(grids):
    left, right = grids
    z, _ = manufactured_state(grids)
    res = constraint_residuals(z, left, right, "generator-domain")
    for theta in (0.3, 1.7, -2.2):
        phase = np.exp(1j * theta)
        zs = StateVector(
            v_vals=phase * z.v_vals,
            V_vals=phase * z.V_vals,
            w_vals=phase * z.w_vals,
            W_vals=phase * z.W_vals,
        )
        res_s = constraint_residuals(zs, left, right, "generator-domain")
        assert np.max(np.abs(res_s - res)) <= 1e-13 * max(1.0, np.max(res))


def test_dimension_mismatch(grids):
    left, right = grids
    z = StateVector.zero(left.n + 1, right.n)
    with pytest.raises(DimensionError):
        constraint_residuals(z, left, right, "state-space")
    with pytest.raises(DimensionError):
        StateVector.from_flat(np.zeros(7), 24, 24)


def test_unknown_kind(grids):
    left, right = grids
    z = StateVector.zero(left.n, right.n)
    with pytest.raises(ValueError, match="membership kind"):
        constraint_residuals(z, left, right, "both")


def test_flat_round_trip(grids):
    left, right = grids
    rng = np.random.default_rng(1)
    y = rng.standard_normal(2 * left.n + 2 * right.n) * 1j + rng.standard_normal(
        2 * left.n + 2 * right.n
    )
    z = StateVector.from_flat(y, left.n, right.n)
    assert np.array_equal(z.to_flat(), y)
