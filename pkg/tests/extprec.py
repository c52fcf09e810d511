"""Extended-precision measurement harness for consistency checks.

Double-precision samples of a deflection carry eps-level noise whose
fourth spectral derivative is ~n^8 times larger (~1e-5 at n=48), so no
value-space pipeline, double or float128, can measure the oracle versus
generator consistency down to the 1e-8 the scheme actually achieves. The
check therefore runs in Chebyshev coefficient space in float128, where
antidifferentiation followed by differentiation is exactly inverse and
nodal resampling is replicated by the alias fold a_{n-2} += a_n (T_n and
T_{n-2} agree on the Lobatto nodes). numpy.linalg has no float128 kernels,
so the small linear solves run in double with extended-precision
iterative refinement.
"""

import numpy as np
from numpy.polynomial import chebyshev as npcheb

LD = np.longdouble
CLD = np.clongdouble
PI = LD("3.141592653589793238462643383279502884")


def refine_solve(a, b, steps=3):
    """Solve a x = b with extended-precision iterative refinement."""
    a_d = np.asarray(a, dtype=complex)
    x = np.linalg.solve(a_d, np.asarray(b, dtype=complex))
    al = np.asarray(a, dtype=CLD)
    bl = np.asarray(b, dtype=CLD)
    for _ in range(steps):
        r = (bl - al @ x.astype(CLD)).astype(complex)
        x = x + np.linalg.solve(a_d, r)
    return x.astype(CLD)


def cheb_l2_gram(n, length):
    """Exact Gram matrix of T_0..T_{n-1} in L^2 of an interval."""
    g = np.zeros((n, n), dtype=LD)
    for j in range(n):
        for k in range(n):
            if (j + k) % 2 == 0:
                s = j + k
                d = abs(j - k)
                term = LD(0)
                if s != 1:
                    term += LD(1) / (1 - LD(s) ** 2)
                if d != 1:
                    term += LD(1) / (1 - LD(d) ** 2)
                g[j, k] = term
    return g * LD(length) / 2


class CoeffGrid:
    """float128 Chebyshev coefficient workspace for one subinterval."""

    def __init__(self, n, a, b):
        self.n, self.a, self.b = n, LD(a), LD(b)
        m = n - 1
        j = np.arange(n)
        theta = PI * j.astype(LD) / m
        t_desc = np.cos(theta)
        perm = np.eye(n, dtype=LD)[::-1]
        self.nodes = self.a + (self.b - self.a) * (t_desc[::-1] + 1) / 2
        cosmat = np.cos(np.outer(j, theta))
        wj = np.ones(n, dtype=LD)
        wj[0] = wj[-1] = 0.5
        dk = np.ones(n, dtype=LD)
        dk[0] = dk[-1] = 2.0
        self.to_coeff = ((2.0 / m) * (cosmat * wj[None, :]) / dk[:, None]) @ perm
        self.gram = cheb_l2_gram(n, float(b - a))
        self.scale = LD(2.0) / (self.b - self.a)

    def coeffs(self, values):
        return self.to_coeff @ np.asarray(values, dtype=CLD)

    def der(self, co, order=1):
        out = np.asarray(co, dtype=CLD)
        for _ in range(order):
            out = np.append(npcheb.chebder(out), CLD(0)) * self.scale
        return out

    def antider_resampled(self, co, from_left):
        """One antidifferentiation with the nodal-resampling alias fold."""
        ext = npcheb.chebint(np.asarray(co, dtype=CLD)) / self.scale  # degree n
        folded = ext[: self.n].copy()
        folded[self.n - 2] += ext[self.n]  # T_n == T_{n-2} on the nodes
        signs = np.array([LD(-1) ** k for k in range(self.n)])
        endpoint = signs if from_left else np.ones(self.n, dtype=LD)
        folded[0] -= endpoint @ folded
        return folded

    def l2_norm(self, co):
        c = np.asarray(co, dtype=CLD)
        return float(np.sqrt(abs(np.conj(c) @ (self.gram @ c))))

    def value_at(self, co, left_end):
        c = np.asarray(co, dtype=CLD)
        if left_end:
            signs = np.array([LD(-1) ** k for k in range(len(c))])
            return complex(signs @ c)
        return complex(np.sum(c))

    def monomial_coeffs(self, power, center):
        """Chebyshev coefficients of (x - center)^power on [a, b]."""
        # x - center = alpha t + beta with t in [-1, 1]
        alpha = (self.b - self.a) / 2
        beta = (self.a + self.b) / 2 - LD(center)
        poly = np.zeros(power + 1, dtype=LD)
        poly[0] = 1.0
        base = np.array([beta, alpha], dtype=LD)
        for _ in range(power):
            poly = np.polynomial.polynomial.polymul(poly, base)
        co = npcheb.poly2cheb(poly)
        out = np.zeros(self.n, dtype=LD)
        out[: len(co)] = co
        return out


class ExtendedBeam:
    """Coefficient-space replica of the two-segment state space."""

    def __init__(self, n_left, n_right, ell0, ell):
        self.left = CoeffGrid(n_left, 0.0, ell0)
        self.right = CoeffGrid(n_right, ell0, ell)
        self.ell0, self.ell = LD(ell0), LD(ell)


def smooth_constrained_state(beam, rng, n_modes=6, decay=0.7):
    """Random sine-series state corrected onto the constraint set.

    Returns per-component coefficient vectors (v, V, w, W) in float128.
    """
    comps = {}
    for name, grid in (("v", beam.left), ("V", beam.left), ("w", beam.right), ("W", beam.right)):
        s = (grid.nodes - grid.a) / (grid.b - grid.a)
        f = np.zeros(grid.n, dtype=CLD)
        for k in range(1, n_modes + 1):
            amp = decay**k * (rng.standard_normal() + 1j * rng.standard_normal())
            f = f + CLD(amp) * np.sin(k * PI * s + 2 * PI * LD(rng.random()))
        comps[name] = grid.coeffs(f)

    lg, rg = beam.left, beam.right

    def trace(name, order, left_end):
        grid = lg if name in ("v", "V") else rg
        return grid.value_at(grid.der(comps[name], order), left_end)

    def residuals():
        return np.array(
            [
                trace("v", 0, True),
                trace("v", 1, True),
                trace("w", 0, False),
                trace("w", 1, False),
                trace("v", 0, False) - trace("w", 0, True),
                trace("v", 1, False) - trace("w", 1, True),
                trace("V", 0, True),
                trace("V", 1, True),
                trace("W", 0, False),
                trace("W", 1, False),
                trace("V", 0, False) - trace("W", 0, True),
                trace("V", 1, False) - trace("W", 1, True),
                trace("v", 2, False) - trace("w", 2, True),
                trace("v", 3, False) - (trace("w", 3, True) - trace("W", 1, True)),
            ],
            dtype=CLD,
        )

    # correction columns: low-degree monomials, 4+3+4+3 split
    plan = [("v", p, 0.0) for p in range(4)] + [("V", p, 0.0) for p in range(3)]
    plan += [("w", p, float(beam.ell)) for p in range(4)]
    plan += [("W", p, float(beam.ell)) for p in range(3)]
    base = {k: v.copy() for k, v in comps.items()}
    columns = []
    for name, power, center in plan:
        grid = lg if name in ("v", "V") else rg
        for key, g in (("v", lg), ("V", lg), ("w", rg), ("W", rg)):
            comps[key] = np.zeros(g.n, dtype=CLD)
        comps[name] = grid.monomial_coeffs(power, center).astype(CLD)
        columns.append(residuals())
    cu = np.column_stack(columns)
    comps.update(base)
    rhs = residuals()
    alpha = refine_solve(cu, rhs)
    for (name, power, center), a in zip(plan, alpha):
        grid = lg if name in ("v", "V") else rg
        comps[name] = comps[name] - a * grid.monomial_coeffs(power, center).astype(CLD)
    return comps


def oracle_inverse(beam, comps):
    """Closed-form inverse in coefficient space, resampling each level."""
    lg, rg = beam.left, beam.right
    p = -comps["V"]
    chain_p = [p]
    for _ in range(4):
        chain_p.append(lg.antider_resampled(chain_p[-1], from_left=True))
    src = rg.der(comps["w"], 2) - comps["W"]
    chain_q = [src]
    for _ in range(4):
        chain_q.append(rg.antider_resampled(chain_q[-1], from_left=False))

    ell0, ell = beam.ell0, beam.ell
    d = ell0 - ell
    m = np.array(
        [
            [ell0**3, ell0**2, -(d**3), -(d**2)],
            [3 * ell0**2, 2 * ell0, -3 * d**2, -2 * d],
            [6 * ell0, 2, -6 * d, -2],
            [6, 0, -6, 0],
        ],
        dtype=LD,
    )
    # traces at ell0: right end of the left grid, left end of the right grid
    b = np.array(
        [
            rg.value_at(chain_q[4], True) - lg.value_at(chain_p[4], False),
            rg.value_at(chain_q[3], True) - lg.value_at(chain_p[3], False),
            rg.value_at(chain_q[2], True) - lg.value_at(chain_p[2], False),
            rg.value_at(chain_q[1], True)
            - lg.value_at(chain_p[1], False)
            - rg.value_at(rg.der(comps["w"], 1), True),
        ],
        dtype=CLD,
    )
    a = refine_solve(m, b)

    v = chain_p[4].copy()
    v += a[0] * lg.monomial_coeffs(3, 0.0) + a[1] * lg.monomial_coeffs(2, 0.0)
    w = chain_q[4].copy()
    w += a[2] * rg.monomial_coeffs(3, float(ell)) + a[3] * rg.monomial_coeffs(2, float(ell))
    return v, w


def left_inverse_residual(beam, comps):
    """||A z - z_hat||_H / ||z_hat||_H, all in coefficient space."""
    lg, rg = beam.left, beam.right
    v, w = oracle_inverse(beam, comps)
    r_v = -lg.der(v, 4) - comps["V"]
    r_w = -rg.der(w, 4) + rg.der(comps["w"], 2) - comps["W"]
    num = np.sqrt(lg.l2_norm(r_v) ** 2 + rg.l2_norm(r_w) ** 2)
    den = np.sqrt(
        lg.l2_norm(lg.der(comps["v"], 2)) ** 2
        + lg.l2_norm(comps["V"]) ** 2
        + rg.l2_norm(rg.der(comps["w"], 2)) ** 2
        + rg.l2_norm(comps["W"]) ** 2
    )
    return num / den
