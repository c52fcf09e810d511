"""Dense complex linear algebra kernel.

Factor/solve with residual reporting, operator norms in a weighted inner
product, a dense nonsymmetric eigensolve with per-pair residuals, and
log-log least-squares fitting. LAPACK (via numpy/scipy) backs the
factorizations; the weighted norm is power iteration on the normal
operator, with a full SVD kept as a test oracle only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

EIG_DIM_CAP = 2000
PIVOT_TOL = 1e-14


class SingularMatrixError(np.linalg.LinAlgError):
    """Pivot below threshold: the system is numerically singular."""


class NotSPDError(np.linalg.LinAlgError):
    """Weight matrix failed the Cholesky factorization."""


class EigDimensionError(ValueError):
    """Matrix exceeds the configured eigensolve dimension cap."""


class FitError(ValueError):
    """Nonpositive data or too small a window for a power-law fit."""


@dataclass
class EigenPair:
    value: complex
    vector: np.ndarray
    residual: float  # ||A v - value v||_2 / ||v||_2


@dataclass
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple


@dataclass
class SolveResult:
    x: np.ndarray
    residual: float  # ||A x - b|| / ||b||, evaluated in extended precision


def _require_square(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a.shape[0]


def residual_norm(a: np.ndarray, x: np.ndarray, b: np.ndarray) -> float:
    """||A x - b|| / ||b|| computed in extended precision.

    At working precision the measurement itself floors at eps * ||A||,
    which exceeds the contract tolerances for large differentiation
    matrices; extended precision moves the floor three orders down.
    """
    al = a.astype(np.clongdouble)
    xl = x.astype(np.clongdouble)
    bl = b.astype(np.clongdouble)
    bnorm = np.linalg.norm(bl.astype(complex))
    if bnorm == 0.0:
        return float(np.linalg.norm((al @ xl).astype(complex)))
    r = al @ xl - bl
    return float(np.linalg.norm(r.astype(complex)) / bnorm)


def solve(a: np.ndarray, b: np.ndarray, refine: int = 2) -> SolveResult:
    """Solve A x = b by pivoted LU with iterative refinement.

    Raises SingularMatrixError when a pivot falls below
    PIVOT_TOL * max |entry|. The returned residual is always reported.
    """
    n = _require_square(a)
    b = np.asarray(b, dtype=complex)
    if b.shape[0] != n:
        raise ValueError(f"right-hand side has length {b.shape[0]}, matrix is {n}x{n}")
    a = np.asarray(a, dtype=complex)
    lu, piv = sla.lu_factor(a)
    pivots = np.abs(np.diag(lu))
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0 or np.min(pivots) < PIVOT_TOL * scale:
        raise SingularMatrixError(
            f"numerically singular: min pivot {np.min(pivots):.3e} "
            f"below {PIVOT_TOL:.1e} * {scale:.3e}"
        )
    x = sla.lu_solve((lu, piv), b)
    al = a.astype(np.clongdouble)
    bl = b.astype(np.clongdouble)
    for _ in range(refine):
        r = (bl - al @ x.astype(np.clongdouble)).astype(complex)
        x = x + sla.lu_solve((lu, piv), r)
    return SolveResult(x=x, residual=residual_norm(a, x, b))


def _power_norm(matvec, rmatvec, dim, rtol=1e-8, maxiter=5000, seed=0):
    """Largest singular value via power iteration on the normal operator."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for it in range(1, maxiter + 1):
        w = matvec(v)
        new_sigma = np.linalg.norm(w)
        if new_sigma == 0.0:
            return 0.0, it, True
        v = rmatvec(w)
        v /= np.linalg.norm(v)
        if it > 1 and abs(new_sigma - sigma) <= rtol * new_sigma:
            return float(new_sigma), it, True
        sigma = new_sigma
    return float(sigma), maxiter, False


def weighted_operator_norm(
    r: np.ndarray, g: np.ndarray, rtol: float = 1e-8, maxiter: int = 5000, seed: int = 0
) -> float:
    """Norm of R as an operator on the G-inner-product space.

    With G = L L^T this is the largest singular value of L^T R L^{-T},
    estimated by power iteration on the normal operator. Non-convergence
    returns the best estimate with a warning.
    """
    n = _require_square(r)
    if g.shape != (n, n):
        raise ValueError(f"weight matrix shape {g.shape} does not match {r.shape}")
    try:
        low = sla.cholesky(g, lower=True)
    except sla.LinAlgError as exc:
        raise NotSPDError("weight matrix is not symmetric positive definite") from exc
    lt = low.T

    def matvec(v):
        return lt @ (r @ sla.solve_triangular(lt, v, lower=False))

    def rmatvec(v):
        return sla.solve_triangular(low, r.conj().T @ (low @ v), lower=True)

    value, iters, converged = _power_norm(
        matvec, rmatvec, n, rtol=rtol, maxiter=maxiter, seed=seed
    )
    if not converged:
        warnings.warn(
            f"weighted_operator_norm: power iteration hit {iters} iterations "
            f"without meeting rtol={rtol:g}; returning best estimate",
            RuntimeWarning,
            stacklevel=2,
        )
    return value


def weighted_norm_svd_oracle(r: np.ndarray, g: np.ndarray) -> float:
    """Brute-force weighted norm via the full SVD of the conjugated matrix.

    Test oracle only; forms L^T R L^{-T} explicitly.
    """
    low = sla.cholesky(g, lower=True)
    conj = low.T @ sla.solve_triangular(low, r.T, lower=True).T
    return float(sla.svdvals(conj)[0])


def eig_dense(a: np.ndarray, dim_cap: int = EIG_DIM_CAP) -> list:
    """All eigenpairs of a dense matrix, sorted by real part descending.

    Each pair carries the Euclidean residual ||A v - value v|| / ||v||.
    """
    n = _require_square(a)
    if n > dim_cap:
        raise EigDimensionError(f"matrix dimension {n} exceeds cap {dim_cap}")
    try:
        values, vectors = sla.eig(a)
    except sla.LinAlgError as exc:
        raise RuntimeError(f"dense eigensolve failed: {exc}") from exc
    order = np.argsort(-values.real)
    pairs = []
    for idx in order:
        vec = vectors[:, idx]
        res = np.linalg.norm(a @ vec - values[idx] * vec) / np.linalg.norm(vec)
        pairs.append(EigenPair(value=complex(values[idx]), vector=vec, residual=float(res)))
    return pairs


def fit_loglog(points, window=None) -> PowerLawFit:
    """Least-squares line through (log x, log y) over an index window."""
    xs = np.asarray([p[0] for p in points], dtype=float)
    ys = np.asarray([p[1] for p in points], dtype=float)
    if window is None:
        window = (0, len(xs))
    start, stop = window
    xs, ys = xs[start:stop], ys[start:stop]
    if len(xs) < 3:
        raise FitError(f"window {window} holds {len(xs)} points, need >= 3")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise FitError("power-law fit requires strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return PowerLawFit(
        slope=float(slope), intercept=float(intercept), r_squared=r2, window=(start, stop)
    )
