"""Application pipelines: Green's-identity diagnostic, the two surface-field
decomposition routes, flux-surface construction, and external-field recovery
with current loops."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .geom import SurfaceGrid
from .grid import GridFunction, fourier_diff
from .kernels import CurrentLoop, biot_savart_loop, circle_loop
from .quad_merkel import merkel_dl_pv
from .quad_pou import LayerEvaluator, PouConfig
from .solver import GmresConfig, SolveReport, solve_exterior_neumann


@dataclass
class FieldOnSurface:
    """A 3-component field sampled on a grid, optionally a flux surface.

    ``flux_tol`` declares the max |n.B| / max |B| level below which the field
    is treated as tangent to the surface (None = not a flux surface).
    """

    B: GridFunction
    Bn: GridFunction | None = None
    flux_tol: float | None = None


def greens_identity_error(grid: SurfaceGrid, scheme: str,
                          cfg: PouConfig | None = None) -> float:
    """Max-norm residual of 1 + (1/2pi) PV int n'.(r-r')/|r-r'|^3 da' = 0.

    ``scheme`` is one of 'pou', 'merkel_stag', 'merkel_nostag'.
    """
    ones = np.ones((grid.Nu, grid.Nv))
    if scheme == "pou":
        W = LayerEvaluator(grid, "dl", cfg or PouConfig())(ones)
        e = 1.0 + W / (2 * np.pi)
    elif scheme in ("merkel_stag", "merkel_nostag"):
        W = merkel_dl_pv(grid, ones, staggered=(scheme == "merkel_stag"))
        e = 1.0 + 2.0 * W
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return float(np.abs(e).max())


def _check_flux(grid: SurfaceGrid, field: FieldOnSurface) -> np.ndarray:
    B = field.B.values
    bn = np.einsum("ijk,ijk->ij", grid.normal, B)
    bmax = np.linalg.norm(B, axis=-1).max()
    if bmax > 0 and np.abs(bn).max() > 1e-6 * bmax and (
            field.flux_tol is None or np.abs(bn).max() > 10 * field.flux_tol * bmax):
        warnings.warn(
            f"field is not tangent to the surface: max|n.B|/max|B| = "
            f"{np.abs(bn).max() / bmax:.2e}; the surface-integral "
            "decomposition assumes a flux surface"
        )
    return bn


def virtual_casing_bn(grid: SurfaceGrid, field: FieldOnSurface,
                      cfg: PouConfig | None = None) -> GridFunction:
    """Normal component of the internally-generated field, from n x B.

    Evaluates (1/4pi) n(r) . PV int (n' x B') x (r - r') / |r - r'|^3 da'
    with the high-order quadrature.  Requires B tangent to the surface.
    """
    _check_flux(grid, field)
    q = np.cross(grid.normal, field.B.values)
    raw = LayerEvaluator(grid, "casing", cfg or PouConfig())(q)
    return GridFunction(raw / (4 * np.pi))


def virtual_casing_via_potential(grid: SurfaceGrid, field: FieldOnSurface,
                                 cfg: PouConfig | None = None) -> GridFunction:
    """Same quantity via the tangential vector potential.

    Computes A = (1/4pi) int (n' x B') / |r - r'| da' and then the normal
    component of its surface curl with spectral differentiation:
    n . curl A = [d_u (A . r_v) - d_v (A . r_u)] / g.
    """
    _check_flux(grid, field)
    q = np.cross(grid.normal, field.B.values)
    A = LayerEvaluator(grid, "vecpot", cfg or PouConfig())(q) / (4 * np.pi)
    a_rv = np.einsum("ijk,ijk->ij", A, grid.r_v)
    a_ru = np.einsum("ijk,ijk->ij", A, grid.r_u)
    bn = (fourier_diff(a_rv, "u") - fourier_diff(a_ru, "v")) / grid.g
    return GridFunction(bn)


def default_loop_pair(grid: SurfaceGrid, current_inner: float = 1.0,
                      current_outer: float = 1.0):
    """The standard loop pair for the recovery experiments.

    An internal toroidal ring of the surface's major radius in the z = 0
    plane, and an external vertical loop of radius 1.5 a centered a distance
    R0 + 3 a from the axis (a = minor radius).
    """
    R0 = grid.surface.major_radius
    a = grid.surface.minor_radius()
    inner = circle_loop(R0, current_inner, plane="xy")
    outer = circle_loop(1.5 * a, current_outer, center=(R0 + 3 * a, 0.0, 0.0),
                        plane="xz")
    return inner, outer


def _loop_clearance(grid: SurfaceGrid, loop: CurrentLoop) -> float:
    pos, _ = loop.samples()
    pts = grid.nodes_flat()
    d = np.linalg.norm(pts[:, None, :] - pos[None, :, :], axis=-1)
    return float(d.min())


def tangential_gradient(grid: SurfaceGrid, phi: np.ndarray) -> np.ndarray:
    """Surface-tangential part of grad phi from spectral derivatives."""
    phi_u = fourier_diff(phi, "u")
    phi_v = fourier_diff(phi, "v")
    ru, rv = grid.r_u, grid.r_v
    E = np.einsum("ijk,ijk->ij", ru, ru)
    F = np.einsum("ijk,ijk->ij", ru, rv)
    G = np.einsum("ijk,ijk->ij", rv, rv)
    det = E * G - F * F
    cu = (G * phi_u - F * phi_v) / det
    cv = (E * phi_v - F * phi_u) / det
    return cu[..., None] * ru + cv[..., None] * rv


def make_flux_surface(grid: SurfaceGrid, loops, qcfg: PouConfig | None = None,
                      gcfg: GmresConfig | None = None):
    """Add a vacuum gradient field so the total loop field is tangent to Gamma.

    Evaluates the Biot-Savart field of the loops on the grid, solves the
    exterior Neumann problem with bn = -n . B, and reconstructs
    B_tot = B + grad Phi on the surface (normal part from the boundary data,
    tangential part from spectral differentiation of Phi).

    Returns
    -------
    field : FieldOnSurface
        Tagged with the achieved tangency level.
    report : SolveReport
    """
    qcfg = qcfg or PouConfig()
    gcfg = gcfg or GmresConfig()
    a = grid.surface.minor_radius()
    pts = grid.nodes_flat()
    B = np.zeros((grid.n_nodes, 3))
    for loop in loops:
        if _loop_clearance(grid, loop) <= 0.05 * a:
            raise ValueError("current loop passes within 0.05 minor radii of the surface")
        B += biot_savart_loop(loop, pts)
    B = B.reshape(grid.Nu, grid.Nv, 3)
    if not loops:
        zero = GridFunction(np.zeros((grid.Nu, grid.Nv)))
        return FieldOnSurface(GridFunction(B), zero, 0.0), SolveReport(0, 0.0, True)
    bn = -np.einsum("ijk,ijk->ij", grid.normal, B)
    phi, report = solve_exterior_neumann(grid, bn, qcfg, gcfg)
    if not report.converged:
        raise RuntimeError(
            f"exterior Neumann solve failed: residual {report.final_residual:.2e} "
            f"after {report.iterations} iterations"
        )
    grad = bn[..., None] * grid.normal + tangential_gradient(grid, phi)
    B_tot = B + grad
    bn_tot = np.einsum("ijk,ijk->ij", grid.normal, B_tot)
    bmax = np.linalg.norm(B, axis=-1).max()
    field = FieldOnSurface(
        B=GridFunction(B_tot),
        Bn=GridFunction(bn_tot),
        flux_tol=float(np.abs(bn_tot).max() / bmax),
    )
    return field, report


def recover_external_field(grid: SurfaceGrid, field: FieldOnSurface,
                           external_loop: CurrentLoop, route: str = "eq2",
                           cfg: PouConfig | None = None):
    """Recover the external-source normal field from the total surface field.

    Applies the chosen decomposition route ('eq2': sheet-current kernel;
    'eq3': vector potential + spectral curl) to get the internal normal
    field, flips its sign, and compares with the direct Biot-Savart field of
    the known external loop.

    Returns
    -------
    error : float
        max |Bn_ref - Bn_recovered| / max |B|.
    bn_ext : GridFunction
        The recovered external normal field.
    """
    if route == "eq2":
        bn_plasma = virtual_casing_bn(grid, field, cfg)
    elif route == "eq3":
        bn_plasma = virtual_casing_via_potential(grid, field, cfg)
    else:
        raise ValueError(f"unknown route {route!r}")
    bn_ext = GridFunction(-bn_plasma.values)
    ref = biot_savart_loop(external_loop, grid.nodes_flat()).reshape(
        grid.Nu, grid.Nv, 3
    )
    bn_ref = np.einsum("ijk,ijk->ij", grid.normal, ref)
    bmax = np.linalg.norm(field.B.values, axis=-1).max()
    err = float(np.abs(bn_ref - bn_ext.values).max() / bmax)
    return err, bn_ext
