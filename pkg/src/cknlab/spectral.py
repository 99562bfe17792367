"""Linearized stability analysis around Barenblatt profiles, sector by sector.

Perturbations decompose over spherical-harmonic sectors; in sector ell the
quadratic form of the linearization around a positive radial profile w is

    a(f) = int (f'^2 + ell (ell + d - 2) f^2 / r^2) r^(d-1) dr
           + p int w^(p-1) f^2 r^(d-1-gamma) dr

against  b(f) = (2p - 1) int w^(2(p-1)) f^2 r^(d-1-gamma) dr.  The sector
operator is the pencil (a - b, b), so eigenvalue 0 marks marginal stability
and the unweighted translation mode sits exactly at 0 in sector ell = 1.

Discretization is piecewise-linear finite elements on a graded grid with
per-cell Gauss quadrature: the forms stay symmetric and the discrete
eigenvalues are variational upper bounds.  Constraints are imposed by
projecting the trial space, never by penalties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import EigenSolverFailure, SingularMass
from .params import ProblemParams, validate
from .profiles import RadialProfile, w_gamma_star

__all__ = [
    "SectorOperator",
    "spectral_grid",
    "assemble",
    "lowest_eigenvalue",
    "hardy_poincare_gap",
    "gamma_sweep",
]

# 4-point Gauss-Legendre on [0, 1]
_GL_X = 0.5 * (1.0 + np.array([-0.8611363115940526, -0.3399810435848563,
                               0.3399810435848563, 0.8611363115940526]))
_GL_W = 0.5 * np.array([0.3478548451374538, 0.6521451548625461,
                        0.6521451548625461, 0.3478548451374538])


def spectral_grid(n: int = 1200, r_min: float = 1e-4, r_max: float = 1e4) -> np.ndarray:
    return np.geomspace(r_min, r_max, n)


def _tri_mass(r: np.ndarray, weight) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal FE mass matrix for int f g weight(r) dr: (diag, off)."""
    h = np.diff(r)
    x = r[:-1, None] + h[:, None] * _GL_X[None, :]
    wq = weight(x) * (h[:, None] * _GL_W[None, :])
    phi_r = (x - r[:-1, None]) / h[:, None]   # rising hat on the cell
    phi_l = 1.0 - phi_r
    d_l = np.sum(wq * phi_l * phi_l, axis=1)
    d_r = np.sum(wq * phi_r * phi_r, axis=1)
    off = np.sum(wq * phi_l * phi_r, axis=1)
    diag = np.zeros(r.size)
    diag[:-1] += d_l
    diag[1:] += d_r
    return diag, off


def _tri_grad(r: np.ndarray, weight) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal FE stiffness for int f' g' weight(r) dr."""
    h = np.diff(r)
    x = r[:-1, None] + h[:, None] * _GL_X[None, :]
    wcell = np.sum(weight(x) * (h[:, None] * _GL_W[None, :]), axis=1)
    coeff = wcell / h**2
    diag = np.zeros(r.size)
    diag[:-1] += coeff
    diag[1:] += coeff
    return diag, -coeff


def _tri_to_dense(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    a = np.diag(diag)
    idx = np.arange(diag.size - 1)
    a[idx, idx + 1] = off
    a[idx + 1, idx] = off
    return a


@dataclass
class SectorOperator:
    """Discretized linearization in one spherical-harmonic sector."""

    ell: int
    grid: np.ndarray
    stiffness: np.ndarray
    mass_matrix: np.ndarray
    constraints: list = field(default_factory=list)
    params: ProblemParams | None = None

    def rayleigh(self, f: np.ndarray) -> float:
        """Rayleigh quotient of the pencil; 0 means marginal stability."""
        return float(f @ self.stiffness @ f) / float(f @ self.mass_matrix @ f)


def assemble(params: ProblemParams, profile, ell: int,
             grid: np.ndarray | None = None) -> SectorOperator:
    """Assemble the sector operator around a positive radial profile.

    profile may be an AnalyticProfile or any callable w(r) > 0.  The outer
    boundary carries a Dirichlet condition (the last node is dropped); the
    inner boundary is natural, which is the regular choice on a truncated
    radial domain.
    """
    d, g, p = params.d, params.gamma, params.p
    r_full = spectral_grid() if grid is None else np.asarray(grid, dtype=float)
    w = profile

    dg1, off1 = _tri_grad(r_full, lambda x: x ** (d - 1.0))
    lam_ell = float(ell * (ell + d - 2))
    if lam_ell:
        dgc, offc = _tri_mass(r_full, lambda x: x ** (d - 3.0))
        dg1 = dg1 + lam_ell * dgc
        off1 = off1 + lam_ell * offc
    dgv, offv = _tri_mass(r_full, lambda x: w(x) ** (p - 1.0) * x ** (d - 1.0 - g))
    dgb, offb = _tri_mass(r_full,
                          lambda x: w(x) ** (2.0 * (p - 1.0)) * x ** (d - 1.0 - g))

    diag_a = dg1 + p * dgv - (2.0 * p - 1.0) * dgb
    off_a = off1 + p * offv - (2.0 * p - 1.0) * offb
    diag_b = (2.0 * p - 1.0) * dgb
    off_b = (2.0 * p - 1.0) * offb

    if np.any(diag_b <= 0.0) or not np.all(np.isfinite(diag_b)):
        raise SingularMass("weight underflow produced a singular mass matrix")

    n = r_full.size - 1  # Dirichlet at the outer boundary
    A = _tri_to_dense(diag_a[:n], off_a[: n - 1])
    B = _tri_to_dense(diag_b[:n], off_b[: n - 1])
    return SectorOperator(ell=ell, grid=r_full, stiffness=A, mass_matrix=B,
                          params=params)


def mass_direction_constraint(params: ProblemParams, profile,
                              grid: np.ndarray) -> np.ndarray:
    """Load vector of w^(2p-1) r^(-gamma) against the FE basis.

    Orthogonality to it is the discrete form of the zero-mean condition
    int omega w^(2p-1) |x|^(-gamma) dx = 0 that removes the mass direction.
    """
    d, g, p = params.d, params.gamma, params.p
    diag, off = _tri_mass(grid, lambda x: profile(x) ** (2.0 * p - 1.0)
                          * x ** (d - 1.0 - g))
    # load vector = the weighted mass matrix applied to the all-ones vector
    vec = diag.copy()
    vec[:-1] += off
    vec[1:] += off
    return vec[:-1]


def _smallest_unconstrained(A: np.ndarray, B: np.ndarray, sigma: float):
    """Shift-invert Lanczos for the smallest pencil eigenvalue.

    The shift must sit strictly below the whole spectrum so that the nearest
    eigenvalue to it is the smallest one; A - sigma B must be invertible.
    Shift-invert keeps full accuracy in the small eigenvalues even when the
    graded grid gives the pencil a dynamic range of many orders of magnitude,
    which a dense congruence-based solver cannot.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    As = sp.csc_matrix(sp.diags(
        [np.diag(A, -1), np.diag(A), np.diag(A, 1)], [-1, 0, 1]))
    Bs = sp.csc_matrix(sp.diags(
        [np.diag(B, -1), np.diag(B), np.diag(B, 1)], [-1, 0, 1]))
    vals, vecs = spla.eigsh(As, k=1, M=Bs, sigma=sigma, which="LM", tol=0.0)
    return float(vals[0]), vecs[:, 0]


def lowest_eigenvalue(op: SectorOperator, n_modes: int = 1):
    """Smallest pencil eigenvalue after projecting out the constraints.

    Returns (lambda_min, eigenprofile) with the eigenprofile normalized in
    the mass-matrix norm and stored on the operator grid (outer Dirichlet
    node reattached as zero).  Unconstrained operators are solved by
    shift-invert with the shift at -1, which is a strict lower bound of the
    pencil spectrum; constrained ones go through a dense solve on the
    projected trial space.
    """
    A, B = op.stiffness, op.mass_matrix
    try:
        if not op.constraints:
            lam, vec = _smallest_unconstrained(A, B, sigma=-1.0)
        else:
            C = np.column_stack(op.constraints)
            if np.linalg.matrix_rank(C) < C.shape[1]:
                raise EigenSolverFailure("constraint vectors are linearly dependent")
            Z = sla.null_space(C.T)
            Ap = Z.T @ A @ Z
            Bp = Z.T @ B @ Z
            s = 1.0 / np.sqrt(np.diag(Bp))
            Ap = Ap * s[:, None] * s[None, :]
            Bp = Bp * s[:, None] * s[None, :]
            vals, vecs = sla.eigh(Ap, Bp, subset_by_index=[0, n_modes - 1])
            lam = float(vals[0])
            vec = Z @ (s * vecs[:, 0])
    except sla.LinAlgError as exc:  # pragma: no cover
        raise EigenSolverFailure(str(exc)) from exc
    norm = math.sqrt(float(vec @ op.mass_matrix @ vec))
    vec = vec / norm
    full = np.concatenate([vec, [0.0]])
    prof = RadialProfile(radii=op.grid, values=full,
                         meta={"ell": op.ell, "eigenvalue": lam})
    return lam, prof


def hardy_poincare_gap(d: int, p: float, n: int = 2000,
                       r_min: float = 1e-4, r_max: float = 1e4):
    """Constrained Rayleigh minimum of the weighted spectral-gap quotient.

    Minimizes int |grad f|^2 w0^(2p) dx / int f^2 w0^(3p-1) dx over functions
    orthogonal to the constants in the w0^(3p-1) inner product, where w0 is
    the unweighted explicit optimizer.  The search space decomposes over
    sectors; the radial sector carries the orthogonality constraint while in
    sector ell = 1 it holds automatically, and higher sectors are dominated.
    Returns (gap, info) where info holds the minimizing sector, the radial
    part of the minimizer and its correlation with the coordinate function.
    """
    params = validate(d, 0.0, p)
    w0 = w_gamma_star(params)
    r = np.geomspace(r_min, r_max, n)

    def weight_num(x):
        return w0(x) ** (2.0 * p) * x ** (d - 1.0)

    def weight_den(x):
        return w0(x) ** (3.0 * p - 1.0) * x ** (d - 1.0)

    def weight_cent(x):
        return w0(x) ** (2.0 * p) * x ** (d - 3.0)

    results = {}
    nn = r.size - 1
    dgrad, ograd = _tri_grad(r, weight_num)
    dden, oden = _tri_mass(r, weight_den)
    B = _tri_to_dense(dden[:nn], oden[: nn - 1])

    # radial sector with the zero-mean constraint
    A0 = _tri_to_dense(dgrad[:nn], ograd[: nn - 1])
    load = dden.copy()
    load[:-1] += oden
    load[1:] += oden
    op0 = SectorOperator(ell=0, grid=r, stiffness=A0, mass_matrix=B,
                         constraints=[load[:nn]])
    lam0, prof0 = lowest_eigenvalue(op0)
    results[0] = (lam0, prof0)

    # ell = 1 sector, constraint automatic
    dcent, ocent = _tri_mass(r, weight_cent)
    A1 = _tri_to_dense(dgrad[:nn] + (d - 1.0) * dcent[:nn],
                       ograd[: nn - 1] + (d - 1.0) * ocent[: nn - 1])
    op1 = SectorOperator(ell=1, grid=r, stiffness=A1, mass_matrix=B)
    lam1, prof1 = lowest_eigenvalue(op1)
    results[1] = (lam1, prof1)

    sector = min(results, key=lambda k: results[k][0])
    gap, prof = results[sector]

    # correlation of the minimizer with the coordinate function in the
    # denominator inner product (meaningful for the ell = 1 sector)
    coord = r[:nn]
    v = prof.values[:nn]
    Bc = B @ coord
    corr = abs(float(v @ Bc)) / math.sqrt(float(coord @ Bc) * float(v @ B @ v))
    info = {
        "sector": sector,
        "by_sector": {k: results[k][0] for k in results},
        "eigenprofile": prof,
        "coordinate_correlation": corr,
    }
    return gap, info


def gamma_sweep(d: int, p: float, gamma_grid, ell: int = 1,
                n: int = 800, r_min: float = 1e-4, r_max: float = 1e4):
    """Lowest sector eigenvalue around the explicit optimizer along gamma.

    Uses one shared grid for the whole sweep so the curve is a continuous
    function of gamma alone.  In the radial sector the mass direction is
    projected out; higher sectors need no constraint.  Returns a list of
    (gamma, lambda_min) pairs.
    """
    grid = np.geomspace(r_min, r_max, n)
    curve = []
    for g in gamma_grid:
        params = validate(d, float(g), p)
        prof = w_gamma_star(params)
        op = assemble(params, prof, ell, grid)
        if ell == 0:
            op.constraints = [mass_direction_constraint(params, prof, grid)]
        lam, _ = lowest_eigenvalue(op)
        curve.append((float(g), lam))
    return curve
