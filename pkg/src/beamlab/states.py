"""Sampled states of the coupled beam system.

A state z = (v, V, w, W) holds the deflection and velocity of the undamped
segment (v, V on (0, ell0)) and of the damped segment (w, W on (ell0, ell)),
sampled at the collocation nodes of the two subdomain grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SubdomainGrid

# fixed constraint order used everywhere (reports, assembly, membership)
STATE_CONSTRAINTS = (
    "v(0)",
    "v_x(0)",
    "w(ell)",
    "w_x(ell)",
    "v(ell0)-w(ell0)",
    "v_x(ell0)-w_x(ell0)",
)
DOMAIN_CONSTRAINTS = STATE_CONSTRAINTS + (
    "V(0)",
    "V_x(0)",
    "W(ell)",
    "W_x(ell)",
    "V(ell0)-W(ell0)",
    "V_x(ell0)-W_x(ell0)",
    "v_xx(ell0)-w_xx(ell0)",
    "v_xxx(ell0)-w_xxx(ell0)+W_x(ell0)",
)


class DimensionError(ValueError):
    """State dimensions inconsistent with the given grids."""


@dataclass
class StateVector:
    """Complex samples of (v, V, w, W) at left/right collocation nodes."""

    v_vals: np.ndarray
    V_vals: np.ndarray
    w_vals: np.ndarray
    W_vals: np.ndarray

    def check_dims(self, left: SubdomainGrid, right: SubdomainGrid):
        if len(self.v_vals) != left.n or len(self.V_vals) != left.n:
            raise DimensionError(
                f"left components have lengths {len(self.v_vals)}, "
                f"{len(self.V_vals)}; grid has {left.n} nodes"
            )
        if len(self.w_vals) != right.n or len(self.W_vals) != right.n:
            raise DimensionError(
                f"right components have lengths {len(self.w_vals)}, "
                f"{len(self.W_vals)}; grid has {right.n} nodes"
            )

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.v_vals, self.V_vals, self.w_vals, self.W_vals])

    @classmethod
    def from_flat(cls, y: np.ndarray, n_left: int, n_right: int) -> "StateVector":
        if len(y) != 2 * n_left + 2 * n_right:
            raise DimensionError(
                f"flat state has length {len(y)}, expected {2 * n_left + 2 * n_right}"
            )
        return cls(
            v_vals=y[:n_left],
            V_vals=y[n_left : 2 * n_left],
            w_vals=y[2 * n_left : 2 * n_left + n_right],
            W_vals=y[2 * n_left + n_right :],
        )

    @classmethod
    def zero(cls, n_left: int, n_right: int) -> "StateVector":
        return cls.from_flat(
            np.zeros(2 * n_left + 2 * n_right, dtype=complex), n_left, n_right
        )


def constraint_residuals(
    z: StateVector, left: SubdomainGrid, right: SubdomainGrid, which: str
) -> np.ndarray:
    """Absolute residuals of the membership constraints, in the fixed order.

    which = "state-space" checks the six conditions defining the energy
    space (clamped ends of the position components and interface continuity
    of value and slope); "generator-domain" appends the eight extra
    conditions the generator's domain imposes (clamped velocity components,
    velocity continuity, curvature continuity, and the shear jump fed by
    the damped segment's velocity gradient).
    """
    z.check_dims(left, right)
    v, V, w, W = z.v_vals, z.V_vals, z.w_vals, z.W_vals
    d1l, d1r = left.d1, right.d1

    res = [
        v[0],
        d1l[0] @ v,
        w[-1],
        d1r[-1] @ w,
        v[-1] - w[0],
        d1l[-1] @ v - d1r[0] @ w,
    ]
    if which == "generator-domain":
        res += [
            V[0],
            d1l[0] @ V,
            W[-1],
            d1r[-1] @ W,
            V[-1] - W[0],
            d1l[-1] @ V - d1r[0] @ W,
            left.d2[-1] @ v - right.d2[0] @ w,
            left.d3[-1] @ v - (right.d3[0] @ w - d1r[0] @ W),
        ]
    elif which != "state-space":
        raise ValueError(f"unknown membership kind {which!r}")
    return np.abs(np.asarray(res))


def check_domain_membership(
    z: StateVector,
    left: SubdomainGrid,
    right: SubdomainGrid,
    which: str,
    tol: float,
) -> list:
    """Return (name, residual, ok) per constraint; ok means residual <= tol."""
    res = constraint_residuals(z, left, right, which)
    names = DOMAIN_CONSTRAINTS if which == "generator-domain" else STATE_CONSTRAINTS
    return [(name, float(r), bool(r <= tol)) for name, r in zip(names, res)]
