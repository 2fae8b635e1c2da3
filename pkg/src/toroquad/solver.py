"""Matrix-free GMRES and the exterior Neumann vacuum-potential solve.

The on-surface potential satisfies the second-kind equation

    Phi - (1/2pi) PV int n'.(r - r')/|r - r'|^3 Phi' da'
        = -(1/2pi) int (n'.grad Phi') / |r - r'| da'

with the right side built from the Neumann data.  Both layer potentials are
evaluated with the high-order partition-of-unity quadrature.  Applied to a
constant the discrete operator returns twice the constant (the on-surface
solid angle of a closed surface), which is checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import SurfaceGrid
from .grid import GridFunction
from .quad_pou import LayerEvaluator, PouConfig


@dataclass(frozen=True)
class GmresConfig:
    tol: float = 1e-10
    max_iter: int = 100

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise ValueError(f"tol must be in (0, 1), got {self.tol}")
        if not 1 <= self.max_iter <= 500:
            raise ValueError(f"max_iter must be in [1, 500], got {self.max_iter}")


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    converged: bool


def gmres(apply, rhs, cfg: GmresConfig):
    """Full (unrestarted) GMRES with modified Gram-Schmidt.

    Parameters
    ----------
    apply : callable
        Linear operator; takes and returns arrays of the same shape as rhs.
    rhs : ndarray
        Right-hand side (any shape; flattened internally).
    cfg : GmresConfig

    Returns
    -------
    x : ndarray (same shape as rhs)
    report : SolveReport
        ``final_residual`` is relative to ||rhs||.

    Notes
    -----
    Zero initial guess; one re-orthogonalization pass per Arnoldi step;
    residual tracked with Givens rotations, so it is monotone.
    """
    rhs_arr = np.asarray(rhs, dtype=float)
    shape = rhs_arr.shape
    b = rhs_arr.ravel()
    n = b.size
    beta = np.linalg.norm(b)
    if beta == 0.0:
        return np.zeros(shape), SolveReport(0, 0.0, True)

    m = cfg.max_iter
    V = np.zeros((m + 1, n))
    H = np.zeros((m + 1, m))
    cs = np.zeros(m)
    sn = np.zeros(m)
    gvec = np.zeros(m + 1)
    gvec[0] = beta
    V[0] = b / beta

    residual = 1.0
    k_used = 0
    breakdown = False
    for k in range(m):
        w = np.asarray(apply(V[k].reshape(shape)), dtype=float).ravel()
        for j in range(k + 1):
            hjk = V[j] @ w
            w -= hjk * V[j]
            H[j, k] = hjk
        for j in range(k + 1):  # one re-orthogonalization pass
            corr = V[j] @ w
            w -= corr * V[j]
            H[j, k] += corr
        hnorm = np.linalg.norm(w)
        H[k + 1, k] = hnorm
        # apply stored rotations to the new column
        for j in range(k):
            t = cs[j] * H[j, k] + sn[j] * H[j + 1, k]
            H[j + 1, k] = -sn[j] * H[j, k] + cs[j] * H[j + 1, k]
            H[j, k] = t
        denom = np.hypot(H[k, k], H[k + 1, k])
        cs[k] = H[k, k] / denom if denom > 0 else 1.0
        sn[k] = H[k + 1, k] / denom if denom > 0 else 0.0
        H[k, k] = denom
        H[k + 1, k] = 0.0
        gvec[k + 1] = -sn[k] * gvec[k]
        gvec[k] = cs[k] * gvec[k]
        k_used = k + 1
        residual = abs(gvec[k + 1]) / beta
        if hnorm < 1e-300:
            breakdown = True
            break
        V[k + 1] = w / hnorm
        if residual <= cfg.tol:
            break

    y = np.linalg.solve(H[:k_used, :k_used], gvec[:k_used]) if k_used else np.zeros(0)
    x = (y @ V[:k_used]).reshape(shape)
    converged = residual <= cfg.tol or (breakdown and residual <= cfg.tol)
    return x, SolveReport(k_used, float(residual), bool(converged))


def neumann_operator(grid: SurfaceGrid, qcfg: PouConfig):
    """The discrete second-kind operator Phi -> Phi - (1/2pi) DL[Phi]."""
    dl = LayerEvaluator(grid, "dl", qcfg)

    def apply(phi: np.ndarray) -> np.ndarray:
        return phi - dl(phi) / (2 * np.pi)

    return apply


def solve_exterior_neumann(grid: SurfaceGrid, bn, qcfg: PouConfig,
                           gcfg: GmresConfig):
    """Solve the exterior Neumann problem for the on-surface potential.

    Parameters
    ----------
    bn : GridFunction or ndarray (Nu, Nv)
        Normal derivative data n . grad Phi on the surface (for the vacuum
        problem, bn = -n . B0).

    Returns
    -------
    phi : same type as bn
    report : SolveReport
    """
    gf = isinstance(bn, GridFunction)
    bn_arr = bn.values if gf else np.asarray(bn, dtype=float)
    if bn_arr.shape != (grid.Nu, grid.Nv):
        raise ValueError(f"bn must have shape {(grid.Nu, grid.Nv)}")
    sl = LayerEvaluator(grid, "sl", qcfg)
    rhs = -sl(bn_arr) / (2 * np.pi)
    phi, report = gmres(neumann_operator(grid, qcfg), rhs, gcfg)
    return (GridFunction(phi) if gf else phi), report
