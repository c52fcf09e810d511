"""Exact characteristic function for the eigenvalues of the beam generator.

An eigenpair A z = zeta z reduces to two scalar ODEs: v'''' = -zeta^2 v on
the undamped segment and w'''' - zeta w'' + zeta^2 w = 0 on the damped one,
coupled through eight homogeneous end/interface conditions. Collecting the
exponential general solutions against those conditions gives an 8x8 matrix
whose determinant vanishes exactly at the eigenvalues, independent of any
discretization.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .config import BeamGeometry


class DegenerateRootError(ValueError):
    """zeta = 0 collapses the exponential basis; the origin is known to be
    in the resolvent set, so the oracle refuses it."""


class RootRefinementError(RuntimeError):
    """Newton refinement diverged or failed to reach the tolerance."""


class WindingError(RuntimeError):
    """Argument-principle boundary walk could not be resolved."""


@dataclass
class CharacteristicRoot:
    zeta: complex
    det_abs: float  # |D(zeta)| after refinement
    newton_iters: int
    seed_source: str  # "discrete-eigenvalue" | "grid-scan"


def _left_roots(zeta: complex) -> np.ndarray:
    """The four roots of r^4 = -zeta^2, principal branch, sorted by argument."""
    base = cmath.exp(cmath.log(-(zeta**2)) / 4.0)
    roots = [base * 1j**k for k in range(4)]
    return np.array(sorted(roots, key=lambda r: (cmath.phase(r), r.real)))


def _right_roots(zeta: complex) -> np.ndarray:
    """The four roots of r^4 - zeta r^2 + zeta^2 = 0, sorted by argument.

    The quadratic in r^2 factors as r^2 = zeta e^{+-i pi/3}.
    """
    roots = []
    for sign in (1.0, -1.0):
        r2 = zeta * cmath.exp(sign * 1j * cmath.pi / 3.0)
        r = cmath.sqrt(r2)
        roots.extend([r, -r])
    return np.array(sorted(roots, key=lambda r: (cmath.phase(r), r.real)))


def _scaled_basis_rows(roots, a, b, points_orders):
    """Evaluate the normalized solutions e^{r(x-a) - max(Re r, 0)(b-a)}.

    The positive real scale factor caps every entry at |r|^order, so the
    matrix stays finite for |zeta| up to 1e6 and beyond, without moving
    determinant zeros. It is continuous in r (unlike an endpoint-switching
    anchor), so the only determinant discontinuities along a path are sign
    flips from the root ordering, which D^2 removes.
    """
    cols = []
    for r in roots:
        damp = max(r.real, 0.0) * (b - a)
        col = [r**order * cmath.exp(r * (x - a) - damp) for x, order in points_orders]
        cols.append(col)
    return np.array(cols).T


def characteristic_matrix(geom: BeamGeometry, zeta: complex) -> np.ndarray:
    """The 8x8 condition matrix whose determinant vanishes at eigenvalues.

    Rows: v(0)=0, v'(0)=0, w(ell)=0, w'(ell)=0, and at the interface
    v - w = 0, v' - w' = 0, v'' - w'' = 0, v''' - (w''' - zeta w') = 0.
    Columns: four exponential solutions per segment, each rescaled to unit
    peak modulus on its segment.
    """
    if zeta == 0:
        raise DegenerateRootError(
            "zeta = 0 is excluded: the generator is invertible there and the "
            "exponential basis degenerates"
        )
    ell0, ell = geom.ell0, geom.ell
    rl = _left_roots(zeta)
    rr = _right_roots(zeta)

    mat = np.zeros((8, 8), dtype=complex)
    left_eval = _scaled_basis_rows(
        rl,
        0.0,
        ell0,
        [(0.0, 0), (0.0, 1), (ell0, 0), (ell0, 1), (ell0, 2), (ell0, 3)],
    )
    right_eval = _scaled_basis_rows(
        rr,
        ell0,
        ell,
        [(ell, 0), (ell, 1), (ell0, 0), (ell0, 1), (ell0, 2), (ell0, 3)],
    )
    # clamped ends
    mat[0, :4] = left_eval[0]
    mat[1, :4] = left_eval[1]
    mat[2, 4:] = right_eval[0]
    mat[3, 4:] = right_eval[1]
    # interface matching; the last row carries the damping jump -zeta w'
    for i in range(4):
        mat[4 + i, :4] = left_eval[2 + i]
        mat[4 + i, 4:] = -right_eval[2 + i]
    mat[7, 4:] += zeta * right_eval[3, :]
    return mat


def characteristic_det(geom: BeamGeometry, zeta: complex) -> complex:
    """Determinant of the scaled characteristic matrix."""
    return complex(np.linalg.det(characteristic_matrix(geom, zeta)))


def local_det_scale(geom: BeamGeometry, zeta: complex, n_circle: int = 16) -> float:
    """Median |D| on a small circle around zeta, the reference magnitude
    against which |D(zeta)| counts as zero."""
    radius = max(1e-2, 0.02 * abs(zeta) ** 0.5)
    vals = []
    for k in range(n_circle):
        point = zeta + radius * cmath.exp(2j * cmath.pi * k / n_circle)
        if point != 0:
            vals.append(abs(characteristic_det(geom, point)))
    return float(np.median(vals))


def refine_root(
    geom: BeamGeometry,
    seed: complex,
    seed_source: str = "grid-scan",
    max_iters: int = 50,
) -> CharacteristicRoot:
    """Newton-refine a characteristic root from a nearby seed.

    The derivative is a central difference with step 1e-6 * max(1, |zeta|);
    convergence requires |step| <= 1e-12 * max(1, |zeta|). Seeds outside
    the basin (|D| > 1e-2 * local scale) are rejected rather than iterated
    toward an arbitrary root.
    """
    scale = local_det_scale(geom, seed)
    if scale == 0.0 or not np.isfinite(scale):
        raise RootRefinementError(f"degenerate determinant scale near {seed}")
    if abs(characteristic_det(geom, seed)) > 1e-2 * scale:
        raise RootRefinementError(
            f"seed {seed} is outside the refinement basin "
            f"(|D| = {abs(characteristic_det(geom, seed)):.3e} vs "
            f"scale {scale:.3e})"
        )
    zeta = seed
    for it in range(1, max_iters + 1):
        h = 1e-6 * max(1.0, abs(zeta))
        d0 = characteristic_det(geom, zeta)
        dp = characteristic_det(geom, zeta + h)
        dm = characteristic_det(geom, zeta - h)
        deriv = (dp - dm) / (2.0 * h)
        if deriv == 0 or not np.isfinite(abs(deriv)):
            raise RootRefinementError(f"vanishing derivative at {zeta}")
        step = d0 / deriv
        zeta = zeta - step
        if not np.isfinite(abs(zeta)) or abs(zeta - seed) > 10.0 * max(1.0, abs(seed)):
            raise RootRefinementError(f"divergence from seed {seed}")
        if abs(step) <= 1e-12 * max(1.0, abs(zeta)):
            det_abs = abs(characteristic_det(geom, zeta))
            return CharacteristicRoot(
                zeta=zeta, det_abs=det_abs, newton_iters=it, seed_source=seed_source
            )
    raise RootRefinementError(f"no convergence in {max_iters} iterations from {seed}")


def _phase_walk(geom: BeamGeometry, za: complex, zb: complex, max_points: int = 20000):
    """Total argument increment of D^2 along the segment [za, zb].

    D itself may flip sign where the deterministic root ordering permutes
    columns; D^2 is continuous along any path avoiding roots and the
    origin. The walk starts dense (a coarse start can alias a near-2pi
    step to zero) and subdivides until each sub-step turns by less than
    pi/2 and the modulus ratio between neighbours stays moderate.
    """

    def dsq(z):
        val = characteristic_det(geom, z)
        if val == 0.0:
            raise WindingError(f"determinant vanishes on the boundary at {z}")
        return val * val

    seglen = abs(zb - za)

    def accepted(lo, hi, flo, fhi):
        # grade the spacing by distance to the origin: the exponential
        # basis collapses there, so D has a spurious high-order zero whose
        # phase turns fast enough to alias a fixed-step walk
        zlo, zhi = za + (zb - za) * lo, za + (zb - za) * hi
        if (hi - lo) * seglen > 0.2 * max(min(abs(zlo), abs(zhi)), 1e-3):
            return False
        if abs(cmath.phase(fhi / flo)) > 0.5 * cmath.pi:
            return False
        ratio = abs(fhi) / abs(flo)
        return 0.25 <= ratio <= 4.0

    n0 = int(min(512, max(9, round(8.0 * seglen))))
    params = list(np.linspace(0.0, 1.0, n0))
    values = {t: dsq(za + (zb - za) * t) for t in params}
    done = False
    while not done:
        done = True
        new_params = []
        for lo, hi in zip(params[:-1], params[1:]):
            if not accepted(lo, hi, values[lo], values[hi]):
                mid = 0.5 * (lo + hi)
                values[mid] = dsq(za + (zb - za) * mid)
                new_params.append(mid)
                done = False
        if new_params:
            params = sorted(params + new_params)
            if len(params) > max_points:
                raise WindingError(
                    f"boundary walk between {za} and {zb} did not resolve "
                    f"within {max_points} points"
                )
    return sum(
        cmath.phase(values[hi] / values[lo])
        for lo, hi in zip(params[:-1], params[1:])
    )


def count_roots(
    geom: BeamGeometry,
    re_min: float,
    re_max: float,
    im_min: float,
    im_max: float,
) -> int:
    """Number of characteristic roots inside an axis-aligned rectangle.

    Uses the argument principle on D^2 (winding = 2 x root count, with
    multiplicity). The rectangle must exclude the origin, where the
    exponential basis degenerates.
    """
    if re_min >= re_max or im_min >= im_max:
        raise ValueError("rectangle must have positive extent")
    if re_min <= 0.0 <= re_max and im_min <= 0.0 <= im_max:
        raise DegenerateRootError(
            "rectangle contains zeta = 0 where the oracle is undefined; "
            "the origin is in the resolvent set by the explicit inverse"
        )
    corners = [
        complex(re_min, im_min),
        complex(re_max, im_min),
        complex(re_max, im_max),
        complex(re_min, im_max),
    ]
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        total += _phase_walk(geom, a, b)
    count = total / (4.0 * cmath.pi)
    rounded = int(round(count))
    if abs(count - rounded) > 0.05:
        raise WindingError(f"non-integer winding {count:.4f}; refine the rectangle")
    return rounded


def seeds_from_grid(
    geom: BeamGeometry,
    re_min: float,
    re_max: float,
    im_min: float,
    im_max: float,
    n_re: int = 40,
    n_im: int = 40,
) -> list:
    """Local minima of |D| on a rectangular grid, usable as Newton seeds."""
    res = np.linspace(re_min, re_max, n_re)
    ims = np.linspace(im_min, im_max, n_im)
    logdet = np.full((n_re, n_im), np.inf)
    for i, re in enumerate(res):
        for j, im in enumerate(ims):
            z = complex(re, im)
            if z != 0:
                logdet[i, j] = abs(characteristic_det(geom, z))
    seeds = []
    for i in range(1, n_re - 1):
        for j in range(1, n_im - 1):
            window = logdet[i - 1 : i + 2, j - 1 : j + 2]
            if logdet[i, j] == np.min(window) and np.isfinite(logdet[i, j]):
                seeds.append(complex(res[i], ims[j]))
    return seeds
