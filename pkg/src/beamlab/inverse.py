"""Closed-form inverse of the beam generator, discretization-independent.

Solving A z = z_hat reduces to quadrature: the velocity components are
copied from the data, the deflections are fourfold iterated integrals plus
a cubic correction fixed by a 4x4 interface system whose determinant is
12 ell^4 for every geometry. This oracle validates the assembled matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SubdomainGrid
from .states import StateVector, constraint_residuals


class OracleInputError(ValueError):
    """Input violates the membership constraints or the grid layout."""


@dataclass
class InterfaceMatrix:
    """The 4x4 interface system fixing the cubic corrections.

    m is geometry-only with det(m) = 12 ell^4; b_rhs collects the iterated
    integral traces (its last entry carries the -w_hat_x(ell0) term from
    the damped-segment velocity); a_coeffs is the solution.
    """

    m: np.ndarray
    b_rhs: np.ndarray
    a_coeffs: np.ndarray


def interface_matrix(ell0: float, ell: float) -> np.ndarray:
    d = ell0 - ell
    return np.array(
        [
            [ell0**3, ell0**2, -(d**3), -(d**2)],
            [3 * ell0**2, 2 * ell0, -3 * d**2, -2 * d],
            [6 * ell0, 2.0, -6 * d, -2.0],
            [6.0, 0.0, -6.0, 0.0],
        ]
    )


def quad_p(grid: SubdomainGrid, v_hat: np.ndarray) -> np.ndarray:
    """Fourfold iterated integral of -v_hat from the left end.

    p and its first three derivatives vanish at the left end of the grid.
    """
    if len(v_hat) != grid.n:
        raise OracleInputError(f"expected {grid.n} samples, got {len(v_hat)}")
    p = -np.asarray(v_hat, dtype=complex)
    for _ in range(4):
        p = grid.antiderivative_from_left(p)
    return p


def quad_q(grid: SubdomainGrid, w_hat_xx: np.ndarray, w_hat_vel: np.ndarray) -> np.ndarray:
    """Fourfold iterated integral of (w_hat_xx - W_hat) from the right end.

    q and its first three derivatives vanish at the right end of the grid.
    """
    if len(w_hat_xx) != grid.n or len(w_hat_vel) != grid.n:
        raise OracleInputError(
            f"expected {grid.n} samples, got {len(w_hat_xx)}, {len(w_hat_vel)}"
        )
    q = np.asarray(w_hat_xx, dtype=complex) - np.asarray(w_hat_vel, dtype=complex)
    for _ in range(4):
        q = grid.antiderivative_from_right(q)
    return q


def _iterated_chain(grid, source, from_left):
    """source, then its 1x/2x/3x/4x antiderivatives."""
    anti = (
        grid.antiderivative_from_left if from_left else grid.antiderivative_from_right
    )
    chain = [np.asarray(source, dtype=complex)]
    for _ in range(4):
        chain.append(anti(chain[-1]))
    return chain  # [f, I f, I^2 f, I^3 f, I^4 f]


def exact_inverse(
    z_hat: StateVector,
    left: SubdomainGrid,
    right: SubdomainGrid,
    membership_tol: float = 1e-8,
) -> tuple:
    """Solve A z = z_hat in closed form; returns (z, InterfaceMatrix).

    The input must satisfy the energy-space membership constraints; the
    output satisfies the full generator-domain constraints and applying
    the generator recovers z_hat (up to interpolation error of the data).
    """
    z_hat.check_dims(left, right)
    scale = max(
        1.0,
        *(float(np.max(np.abs(f))) for f in
          (z_hat.v_vals, z_hat.V_vals, z_hat.w_vals, z_hat.W_vals)),
    )
    res = constraint_residuals(z_hat, left, right, "state-space")
    if np.any(res > membership_tol * scale):
        worst = int(np.argmax(res))
        raise OracleInputError(
            f"input violates membership constraint #{worst} "
            f"(residual {res[worst]:.3e} > {membership_tol * scale:.3e})"
        )

    ell0, ell = left.b, right.b

    # v = a1 x^3 + a2 x^2 + p(x), derivatives of p by shortening the chain
    p_chain = _iterated_chain(left, -z_hat.V_vals, from_left=True)
    p, p_x, p_xx, p_xxx = p_chain[4], p_chain[3], p_chain[2], p_chain[1]

    w_hat_xx = right.d2 @ z_hat.w_vals
    q_chain = _iterated_chain(right, w_hat_xx - z_hat.W_vals, from_left=False)
    q, q_x, q_xx, q_xxx = q_chain[4], q_chain[3], q_chain[2], q_chain[1]

    w_hat_x_l0 = (right.d1 @ z_hat.w_vals)[0]
    b_rhs = np.array(
        [
            q[0] - p[-1],
            q_x[0] - p_x[-1],
            q_xx[0] - p_xx[-1],
            q_xxx[0] - p_xxx[-1] - w_hat_x_l0,
        ],
        dtype=complex,
    )
    m = interface_matrix(ell0, ell)
    try:
        a_coeffs = np.linalg.solve(m, b_rhs)
    except np.linalg.LinAlgError as exc:  # det = 12 ell^4 > 0, cannot happen
        raise RuntimeError("interface matrix singular for valid geometry") from exc

    xl = left.nodes
    xr = right.nodes
    v = a_coeffs[0] * xl**3 + a_coeffs[1] * xl**2 + p
    w = a_coeffs[2] * (xr - ell) ** 3 + a_coeffs[3] * (xr - ell) ** 2 + q
    z = StateVector(
        v_vals=v,
        V_vals=np.asarray(z_hat.v_vals, dtype=complex).copy(),
        w_vals=w,
        W_vals=np.asarray(z_hat.w_vals, dtype=complex).copy(),
    )
    return z, InterfaceMatrix(m=m, b_rhs=b_rhs, a_coeffs=a_coeffs)
