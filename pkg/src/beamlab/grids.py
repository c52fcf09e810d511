"""Chebyshev collocation grids on one subinterval.

Each subdomain carries ascending Chebyshev-Lobatto nodes, differentiation
matrices up to order four, Clenshaw-Curtis weights, an exact mass matrix
for inner products of nodal interpolants, and a cumulative integration
(antidifferentiation) matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import legendre as npleg


class GridError(ValueError):
    """Invalid grid request (too few points, empty interval)."""


def _chebdif(n: int, m: int):
    """Nodes and differentiation matrices D1..Dm on n Chebyshev points.

    Weideman-Reddy construction on [-1, 1] with the trigonometric-identity
    and flipping tricks plus the negative-sum diagonal. Nodes descend from
    +1 to -1; callers reorder.
    """
    if m >= n:
        raise GridError(f"need n > m derivatives, got n={n}, m={m}")
    n1 = n // 2
    n2 = -(-n // 2)
    k = np.arange(n).reshape(n, 1)
    th = k * np.pi / (n - 1)
    x = np.sin(np.pi * np.arange(n - 1, -n, -2) / (2.0 * (n - 1)))

    t = np.tile(th / 2.0, (1, n))
    dx = 2.0 * np.sin(t.T + t) * np.sin(t.T - t)
    dx[n1:, :] = -np.flipud(np.fliplr(dx[:n2, :]))
    np.fill_diagonal(dx, 1.0)
    z = 1.0 / dx
    np.fill_diagonal(z, 0.0)

    c = (-1.0) ** k.ravel()
    c[0] *= 2.0
    c[-1] *= 2.0
    cmat = np.outer(c, 1.0 / c)

    dm = []
    d = np.eye(n)
    for order in range(1, m + 1):
        d = order * z * (cmat * np.tile(np.diag(d).reshape(n, 1), (1, n)) - d)
        np.fill_diagonal(d, -np.sum(d, axis=1))
        dm.append(d.copy())
    return x, dm


def _clencurt_weights(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights on n Chebyshev-Lobatto points of [-1, 1]."""
    nseg = n - 1
    theta = np.pi * np.arange(n) / nseg
    w = np.zeros(n)
    v = np.ones(nseg - 1)
    if nseg % 2 == 0:
        w[0] = w[-1] = 1.0 / (nseg**2 - 1)
        for k in range(1, nseg // 2):
            v -= 2.0 * np.cos(2.0 * k * theta[1:-1]) / (4.0 * k**2 - 1)
        v -= np.cos(nseg * theta[1:-1]) / (nseg**2 - 1)
    else:
        w[0] = w[-1] = 1.0 / nseg**2
        for k in range(1, (nseg - 1) // 2 + 1):
            v -= 2.0 * np.cos(2.0 * k * theta[1:-1]) / (4.0 * k**2 - 1)
    w[1:-1] = 2.0 * v / nseg
    return w


def _cheb_vandermonde(t: np.ndarray, degree: int) -> np.ndarray:
    return npcheb.chebvander(t, degree)


@dataclass
class SubdomainGrid:
    """Collocation data for one subinterval [a, b].

    nodes ascend from a to b. d1..d4 differentiate nodal interpolants
    exactly (degree <= n-1). quad_weights are Clenshaw-Curtis and sum to
    b - a. mass integrates products of two nodal interpolants exactly;
    antider maps samples to samples of the interpolant's antiderivative
    vanishing at a.
    """

    a: float
    b: float
    n: int
    nodes: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    d4: np.ndarray
    quad_weights: np.ndarray
    mass: np.ndarray
    mass_chol: np.ndarray = field(repr=False)
    antider: np.ndarray = field(repr=False)

    @property
    def length(self) -> float:
        return self.b - self.a

    def integrate(self, values: np.ndarray) -> complex:
        """Clenshaw-Curtis integral of one sampled function over [a, b]."""
        return self.quad_weights @ values

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """Exact L2 inner product of the interpolants of f and g."""
        return np.conj(g) @ (self.mass @ f)

    def antiderivative_from_left(self, values: np.ndarray) -> np.ndarray:
        """Samples of the antiderivative of the interpolant, zero at a."""
        return self.antider @ values

    def antiderivative_from_right(self, values: np.ndarray) -> np.ndarray:
        """Samples of the antiderivative of the interpolant, zero at b."""
        out = self.antider @ values
        return out - out[-1]


def build_grid(n: int, a: float, b: float) -> SubdomainGrid:
    """Build the collocation grid with n points on [a, b].

    Requires n >= 8 and a < b.
    """
    if n < 8:
        raise GridError(f"need at least 8 collocation points, got {n}")
    if not a < b:
        raise GridError(f"empty subinterval: a={a}, b={b}")

    t_desc, dm_desc = _chebdif(n, 4)
    # reindex to ascending nodes; reversal leaves derivative matrices valid
    rev = slice(None, None, -1)
    t = t_desc[rev]
    scale = 2.0 / (b - a)
    nodes = a + (b - a) * (t + 1.0) / 2.0
    nodes[0] = a
    nodes[-1] = b
    dks = [dm_desc[k][rev, :][:, rev] * scale ** (k + 1) for k in range(4)]

    w = _clencurt_weights(n)[rev] * (b - a) / 2.0

    # exact mass matrix: resample the Lagrange basis on a Gauss-Legendre
    # rule of degree >= 2n-1 and accumulate the weighted products
    tg, wg = npleg.leggauss(n + 2)
    vand = _cheb_vandermonde(t, n - 1)
    veval = _cheb_vandermonde(tg, n - 1)
    interp = np.linalg.solve(vand.T, veval.T).T  # rows: gauss pts, cols: nodes
    mass = (interp * wg[:, None]).T @ interp * (b - a) / 2.0
    mass = 0.5 * (mass + mass.T)
    mass_chol = np.linalg.cholesky(mass).T  # upper factor F with F^T F = mass

    # cumulative integration via Chebyshev coefficient antidifferentiation
    coeffs_from_values = np.linalg.solve(vand, np.eye(n))
    int_coeffs = np.zeros((n + 1, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        int_coeffs[:, j] = npcheb.chebint(e)
    eval_at_nodes = _cheb_vandermonde(t, n)
    antider = eval_at_nodes @ int_coeffs @ coeffs_from_values * (b - a) / 2.0
    antider -= antider[0, :]

    return SubdomainGrid(
        a=a,
        b=b,
        n=n,
        nodes=nodes,
        d1=dks[0],
        d2=dks[1],
        d3=dks[2],
        d4=dks[3],
        quad_weights=w,
        mass=mass,
        mass_chol=mass_chol,
        antider=antider,
    )
