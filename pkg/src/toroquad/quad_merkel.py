"""Low-order singularity-subtraction quadrature (second-order baseline).

For the single layer the leading singularity sigma_t g_t / R is subtracted,
where R(u,v,u',v') is the distance approximation induced by the first
fundamental form at the target; the regularized difference is summed with
the trapezoidal rule and the subtracted term's integral over the centered
periodic cell [-pi, pi]^2 is added back in semi-analytic form: the inner
coordinate is integrated in closed form, and the remaining 1D integral has
its logarithmic singularity removed analytically before a panel
Gauss-Legendre rule integrates the analytic remainder.

The principal-value double layer used in the Green's-identity comparison
subtracts the leading kernel term S(s,t) / (2 R^3) built from the second
fundamental form, with the same semi-analytic add-back.  Both evaluators
come in plain and staggered variants; staggered source nodes sit at
half-integer grid offsets (no source coincides with a target).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import sweeps
from .geom import SurfaceGrid, surface_eval, surface_eval2
from .grid import GridFunction, gauss_legendre, spectral_shift


@dataclass(frozen=True)
class FundamentalForm:
    """First fundamental form E du^2 + 2 F du dv + G dv^2 at a point."""

    E: float
    F: float
    G: float

    def __post_init__(self):
        if not (self.E > 0 and self.G > 0 and self.E * self.G - self.F**2 > 0):
            raise ValueError("first fundamental form must be positive definite")


def fundamental_form(grid: SurfaceGrid, i: int, j: int) -> FundamentalForm:
    """E, F, G from the precomputed tangents at node (i, j)."""
    ru = grid.r_u[i, j]
    rv = grid.r_v[i, j]
    return FundamentalForm(float(ru @ ru), float(ru @ rv), float(rv @ rv))


# ---------------------------------------------------------------------------
# semi-analytic integrals of the subtracted terms over [-pi, pi]^2
# ---------------------------------------------------------------------------

# Panel breakpoints refine geometrically toward the (removed) log point at
# t = 0; the regularized integrands are analytic so a fixed panel rule
# converges far below 1e-12.
_PANEL_EDGES = np.pi * np.array(
    [1.0, 1 / 2, 1 / 8, 1 / 32, 1 / 128, 1 / 512, 1 / 2048, 0.0]
)
_PANEL_ORDER = 16


def _panel_nodes():
    rule = gauss_legendre(_PANEL_ORDER)
    ts = []
    ws = []
    for a, b in zip(_PANEL_EDGES[1:], _PANEL_EDGES[:-1]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        ts.append(mid + half * rule.nodes)
        ws.append(half * rule.weights)
    t = np.concatenate(ts)
    w = np.concatenate(ws)
    return np.concatenate([-t[::-1], t]), np.concatenate([w[::-1], w])


_TNODES, _TWEIGHTS = _panel_nodes()


def _sl_outer_integrand(E, F, G, t):
    """Regularized outer integrand of the 1/R cell integral.

    Equal to the closed-form inner integral over s in [-pi, pi] plus
    (2/sqrt(E)) log|t|; analytic on [-pi, pi].
    """
    qp = np.sqrt(E * np.pi**2 + 2 * F * np.pi * t + G * t * t)
    qm = np.sqrt(E * np.pi**2 - 2 * F * np.pi * t + G * t * t)
    sE = np.sqrt(E)
    a1 = 2.0 * (sE * qp + E * np.pi + F * t)
    gt = 2.0 * (E * G - F * F) / (sE * qm + E * np.pi - F * t)
    return (np.log(a1) - np.log(gt)) / sE


def _i_sub_arrays(E, F, G):
    """Vectorized cell integral of 1/R for arrays of form coefficients."""
    E = np.asarray(E, dtype=float)[..., None]
    F = np.asarray(F, dtype=float)[..., None]
    G = np.asarray(G, dtype=float)[..., None]
    t = _TNODES
    vals = _sl_outer_integrand(E, F, G, t)
    reg = (vals * _TWEIGHTS).sum(axis=-1)
    return reg - (2.0 / np.sqrt(E[..., 0])) * 2 * np.pi * (np.log(np.pi) - 1.0)


def subtracted_term_integral(form: FundamentalForm) -> float:
    """Integral of 1/R(u,v,u',v') over the centered cell [-pi, pi]^2."""
    return float(_i_sub_arrays(form.E, form.F, form.G))


def _i_dl_arrays(E, F, G, L, M, N):
    """Vectorized cell integral of S(s,t) / R(s,t)^3.

    S = L s^2 + 2 M s t + N t^2 is the second-fundamental-form quadratic;
    the integral carries the leading singular behavior of the double-layer
    kernel (the kernel itself is S / (2 R^3) to leading order).
    """
    E = np.asarray(E, dtype=float)[..., None]
    F = np.asarray(F, dtype=float)[..., None]
    G = np.asarray(G, dtype=float)[..., None]
    L = np.asarray(L, dtype=float)[..., None]
    M = np.asarray(M, dtype=float)[..., None]
    N = np.asarray(N, dtype=float)[..., None]
    t = _TNODES
    qp = np.sqrt(E * np.pi**2 + 2 * F * np.pi * t + G * t * t)
    qm = np.sqrt(E * np.pi**2 - 2 * F * np.pi * t + G * t * t)
    denom = E * G - F * F
    f_sl = _sl_outer_integrand(E, F, G, t)
    br1 = (2 * E * np.pi + 2 * F * t) / qp + (2 * E * np.pi - 2 * F * t) / qm
    br2t = (2 * F * np.pi + 2 * G * t) / qp - (2 * G * t - 2 * F * np.pi) / qm
    vals = (L / E) * f_sl + ((L * F / E - M) * br2t + (N - L * G / E) * br1 / 2) / denom
    reg = (vals * _TWEIGHTS).sum(axis=-1)
    return reg - (2.0 * L[..., 0] / E[..., 0] ** 1.5) * 2 * np.pi * (np.log(np.pi) - 1.0)


# ---------------------------------------------------------------------------
# grid-level helpers
# ---------------------------------------------------------------------------

def _first_form_arrays(grid: SurfaceGrid):
    ru = grid.r_u.reshape(-1, 3)
    rv = grid.r_v.reshape(-1, 3)
    E = np.einsum("ij,ij->i", ru, ru)
    F = np.einsum("ij,ij->i", ru, rv)
    G = np.einsum("ij,ij->i", rv, rv)
    return E, F, G


def _second_form_arrays(grid: SurfaceGrid):
    """L = n . r_uu, M = n . r_uv, N = n . r_vv at all nodes (cached)."""
    if "second_form" not in grid._cache:
        uu, vv = np.meshgrid(grid.u, grid.v, indexing="ij")
        r_uu, r_uv, r_vv = surface_eval2(grid.surface, uu, vv)
        nrm = grid.normal.reshape(-1, 3)
        L = np.einsum("ij,ij->i", nrm, r_uu.reshape(-1, 3))
        M = np.einsum("ij,ij->i", nrm, r_uv.reshape(-1, 3))
        N = np.einsum("ij,ij->i", nrm, r_vv.reshape(-1, 3))
        grid._cache["second_form"] = (L, M, N)
    return grid._cache["second_form"]


def _wrap_offsets(n: int, h: float, staggered: bool) -> np.ndarray:
    """Wrapped parameter offset for each index difference, in [-pi, pi)."""
    d = np.arange(n, dtype=float)
    if staggered:
        d += 0.5
    return (d * h + np.pi) % (2 * np.pi) - np.pi


def _source_fields(grid: SurfaceGrid, staggered: bool):
    """Positions, scaled normals, and area elements at the source nodes."""
    key = ("merkel_sources", staggered)
    if key not in grid._cache:
        if not staggered:
            pts = grid.r.reshape(-1, 3)
            ng = grid.normal * grid.g[..., None]
            grid._cache[key] = (
                pts,
                ng.reshape(-1, 3),
                grid.g.ravel(),
            )
        else:
            du, dv = grid.h_u / 2, grid.h_v / 2
            uu, vv = np.meshgrid(grid.u + du, grid.v + dv, indexing="ij")
            r, r_u, r_v = surface_eval(grid.surface, uu, vv)
            ng = np.cross(r_u, r_v) * grid.surface.orientation
            g = np.linalg.norm(ng, axis=-1)
            grid._cache[key] = (r.reshape(-1, 3), ng.reshape(-1, 3), g.ravel())
    return grid._cache[key]


def _stagger_sigma(grid: SurfaceGrid, sigma: np.ndarray) -> np.ndarray:
    return spectral_shift(sigma, grid.h_u / 2, grid.h_v / 2)


def merkel_sl_eval(grid: SurfaceGrid, sigma, staggered: bool = False):
    """Single-layer potential (1/4pi) int sigma / |r - r'| da by subtraction.

    In staggered mode the quadrature nodes sit at half-integer grid offsets;
    the density is moved there spectrally and the surface geometry is
    evaluated at the shifted nodes.  Second-order accurate in the grid
    spacing.
    """
    gf = isinstance(sigma, GridFunction)
    sig = (sigma.values if gf else np.asarray(sigma, dtype=float))
    if sig.shape != (grid.Nu, grid.Nv):
        raise ValueError(f"sigma must have shape {(grid.Nu, grid.Nv)}")
    pts_s, _, g_s = _source_fields(grid, staggered)
    sig_s = _stagger_sigma(grid, sig) if staggered else sig
    pts_t = grid.r.reshape(-1, 3)
    E, F, G = _first_form_arrays(grid)
    su = _wrap_offsets(grid.Nu, grid.h_u, staggered)
    sv = _wrap_offsets(grid.Nv, grid.h_v, staggered)
    out = np.empty(grid.n_nodes)
    sweeps.merkel_sl(
        *(np.ascontiguousarray(pts_s[:, k]) for k in range(3)),
        np.ascontiguousarray(g_s), np.ascontiguousarray(sig_s.ravel()),
        *(np.ascontiguousarray(pts_t[:, k]) for k in range(3)),
        np.ascontiguousarray(grid.g.ravel()), np.ascontiguousarray(sig.ravel()),
        E, F, G, su, sv, grid.Nv, out,
    )
    out *= grid.h_u * grid.h_v
    out += sig.ravel() * grid.g.ravel() * _i_sub_arrays(E, F, G)
    out /= 4 * np.pi
    out = out.reshape(grid.Nu, grid.Nv)
    return GridFunction(out) if gf else out


def merkel_dl_eval(grid: SurfaceGrid, sigma):
    """Double-layer potential (1/4pi) PV int K sigma da, density-regularized.

    Uses the closed-surface identity PV int K da = -2 pi to split off the
    constant part exactly: (1/4pi) int K (sigma - sigma_t) da - sigma_t / 2,
    with the bounded difference summed by the trapezoidal rule (coincident
    node skipped).  Exact for constant densities.
    """
    gf = isinstance(sigma, GridFunction)
    sig = (sigma.values if gf else np.asarray(sigma, dtype=float))
    if sig.shape != (grid.Nu, grid.Nv):
        raise ValueError(f"sigma must have shape {(grid.Nu, grid.Nv)}")
    pts = grid.r.reshape(-1, 3)
    ng = (grid.normal * grid.g[..., None]).reshape(-1, 3)
    out = np.empty(grid.n_nodes)
    sweeps.merkel_dl_gauss(
        *(np.ascontiguousarray(pts[:, k]) for k in range(3)),
        *(np.ascontiguousarray(ng[:, k]) for k in range(3)),
        np.ascontiguousarray(sig.ravel()), grid.Nv, out,
    )
    out *= grid.h_u * grid.h_v / (4 * np.pi)
    out -= sig.ravel() / 2
    out = out.reshape(grid.Nu, grid.Nv)
    return GridFunction(out) if gf else out


def merkel_dl_pv(grid: SurfaceGrid, sigma, staggered: bool = False):
    """Principal-value double layer (1/4pi scaled) by kernel subtraction.

    Subtracts the leading kernel term sigma_t g_t S(s,t) / (2 R^3) and adds
    back its semi-analytic cell integral; unlike `merkel_dl_eval` this does
    not regularize through the density, so the Green's-identity test sees
    the scheme's genuine second-order error.
    """
    gf = isinstance(sigma, GridFunction)
    sig = (sigma.values if gf else np.asarray(sigma, dtype=float))
    if sig.shape != (grid.Nu, grid.Nv):
        raise ValueError(f"sigma must have shape {(grid.Nu, grid.Nv)}")
    pts_s, ng_s, _ = _source_fields(grid, staggered)
    sig_s = _stagger_sigma(grid, sig) if staggered else sig
    pts_t = grid.r.reshape(-1, 3)
    E, F, G = _first_form_arrays(grid)
    L, M, N = _second_form_arrays(grid)
    su = _wrap_offsets(grid.Nu, grid.h_u, staggered)
    sv = _wrap_offsets(grid.Nv, grid.h_v, staggered)
    out = np.empty(grid.n_nodes)
    sweeps.merkel_dl_pv(
        *(np.ascontiguousarray(pts_s[:, k]) for k in range(3)),
        *(np.ascontiguousarray(ng_s[:, k]) for k in range(3)),
        np.ascontiguousarray(sig_s.ravel()),
        *(np.ascontiguousarray(pts_t[:, k]) for k in range(3)),
        np.ascontiguousarray(grid.g.ravel()), np.ascontiguousarray(sig.ravel()),
        E, F, G, L, M, N, su, sv, grid.Nv, out,
    )
    out *= grid.h_u * grid.h_v
    out += 0.5 * sig.ravel() * grid.g.ravel() * _i_dl_arrays(E, F, G, L, M, N)
    out /= 4 * np.pi
    out = out.reshape(grid.Nu, grid.Nv)
    return GridFunction(out) if gf else out
