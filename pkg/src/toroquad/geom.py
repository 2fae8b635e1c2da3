"""Doubly-periodic toroidal surfaces given as double Fourier series.

A surface is described in cylindrical coordinates by

    R(u, v) = sum_k [ rc_k cos(m_k u - n_k nfp v) + rs_k sin(m_k u - n_k nfp v) ]
    Z(u, v) = sum_k [ zc_k cos(m_k u - n_k nfp v) + zs_k sin(m_k u - n_k nfp v) ]

with position (R cos v, R sin v, Z), poloidal angle u in [0, 2pi) and
toroidal angle v in [0, 2pi).  This is the usual boundary representation
used by stellarator equilibrium codes, and makes the discrete field-period
symmetry (nfp) exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DegenerateSurfaceError(ValueError):
    """Raised when |r_u x r_v| vanishes at a requested point."""


@dataclass(frozen=True)
class FourierSurface:
    """Toroidal surface as a double Fourier series in (u, v).

    Parameters
    ----------
    nfp : int
        Number of toroidal field periods (discrete symmetry order).
    modes : ndarray, shape (nmodes, 6)
        One row per mode: (m, n, rc, rs, zc, zs).  m >= 0; arguments are
        m*u - n*nfp*v.
    orientation : float
        +1 or -1; sign applied to r_u x r_v so the stored normal points
        outward.  Computed by `oriented`.
    """

    nfp: int
    modes: np.ndarray
    orientation: float = 1.0

    def __post_init__(self):
        modes = np.atleast_2d(np.asarray(self.modes, dtype=float))
        if modes.shape[1] != 6:
            raise ValueError("modes must have columns (m, n, rc, rs, zc, zs)")
        if self.nfp < 1:
            raise ValueError(f"nfp must be a positive integer, got {self.nfp}")
        if np.any(modes[:, 0] < 0):
            raise ValueError("poloidal mode numbers m must be >= 0")
        object.__setattr__(self, "modes", modes)

    @property
    def m(self):
        return self.modes[:, 0]

    @property
    def n(self):
        return self.modes[:, 1]

    @property
    def major_radius(self) -> float:
        """Coefficient of the (m=0, n=0) mode, used as the ring radius."""
        sel = (self.modes[:, 0] == 0) & (self.modes[:, 1] == 0)
        return float(self.modes[sel, 2].sum())

    def minor_radius(self, nsample: int = 64) -> float:
        """Max distance of the surface from the (m=0, n=0) ring."""
        u = np.linspace(0, 2 * np.pi, nsample, endpoint=False)
        v = np.linspace(0, 2 * np.pi, nsample, endpoint=False)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        arg = np.multiply.outer(self.m, uu) - np.multiply.outer(self.n * self.nfp, vv)
        R = np.tensordot(self.modes[:, 2], np.cos(arg), 1) + np.tensordot(
            self.modes[:, 3], np.sin(arg), 1
        )
        Z = np.tensordot(self.modes[:, 4], np.cos(arg), 1) + np.tensordot(
            self.modes[:, 5], np.sin(arg), 1
        )
        return float(np.sqrt((R - self.major_radius) ** 2 + Z**2).max())

    def oriented(self) -> "FourierSurface":
        """Return a copy with the orientation flag set for an outward normal.

        The sign is fixed once at (u, v) = (0, 0): the horizontal radial
        component of r_u x r_v must be positive at the outboard midplane.
        """
        _, r_u, r_v = surface_eval(self, 0.0, 0.0)
        nvec = np.cross(r_u, r_v)
        sign = 1.0 if nvec[0] > 0 else -1.0
        return FourierSurface(self.nfp, self.modes.copy(), sign)


def _series_terms(surface: FourierSurface, u, v):
    """cos/sin of the mode arguments, broadcast over the points."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    m = surface.m
    nn = surface.n * surface.nfp
    arg = np.multiply.outer(m, u) - np.multiply.outer(nn, v)
    return np.cos(arg), np.sin(arg), m, nn


def surface_eval(surface: FourierSurface, u, v):
    """Evaluate position and first derivatives of the parameterization.

    Parameters
    ----------
    surface : FourierSurface
    u, v : float or ndarray
        Angles (reduced mod 2pi implicitly by periodicity of the series).

    Returns
    -------
    r, r_u, r_v : ndarray, shape (..., 3)
        Position and the exact analytic tangents d r / du, d r / dv.
    """
    ca, sa, m, nn = _series_terms(surface, u, v)
    mod = surface.modes
    R = np.tensordot(mod[:, 2], ca, 1) + np.tensordot(mod[:, 3], sa, 1)
    Z = np.tensordot(mod[:, 4], ca, 1) + np.tensordot(mod[:, 5], sa, 1)
    R_u = np.tensordot(-mod[:, 2] * m, sa, 1) + np.tensordot(mod[:, 3] * m, ca, 1)
    R_v = np.tensordot(mod[:, 2] * nn, sa, 1) + np.tensordot(-mod[:, 3] * nn, ca, 1)
    Z_u = np.tensordot(-mod[:, 4] * m, sa, 1) + np.tensordot(mod[:, 5] * m, ca, 1)
    Z_v = np.tensordot(mod[:, 4] * nn, sa, 1) + np.tensordot(-mod[:, 5] * nn, ca, 1)

    cv, sv = np.cos(np.asarray(v, dtype=float)), np.sin(np.asarray(v, dtype=float))
    r = np.stack([R * cv, R * sv, Z], axis=-1)
    r_u = np.stack([R_u * cv, R_u * sv, Z_u], axis=-1)
    r_v = np.stack([R_v * cv - R * sv, R_v * sv + R * cv, Z_v], axis=-1)
    return r, r_u, r_v


def surface_eval2(surface: FourierSurface, u, v):
    """Second derivatives r_uu, r_uv, r_vv of the parameterization."""
    ca, sa, m, nn = _series_terms(surface, u, v)
    mod = surface.modes
    R = np.tensordot(mod[:, 2], ca, 1) + np.tensordot(mod[:, 3], sa, 1)
    R_v = np.tensordot(mod[:, 2] * nn, sa, 1) + np.tensordot(-mod[:, 3] * nn, ca, 1)
    R_uu = np.tensordot(-mod[:, 2] * m * m, ca, 1) + np.tensordot(-mod[:, 3] * m * m, sa, 1)
    R_uv = np.tensordot(mod[:, 2] * m * nn, ca, 1) + np.tensordot(mod[:, 3] * m * nn, sa, 1)
    R_vv = np.tensordot(-mod[:, 2] * nn * nn, ca, 1) + np.tensordot(-mod[:, 3] * nn * nn, sa, 1)
    Z_uu = np.tensordot(-mod[:, 4] * m * m, ca, 1) + np.tensordot(-mod[:, 5] * m * m, sa, 1)
    Z_uv = np.tensordot(mod[:, 4] * m * nn, ca, 1) + np.tensordot(mod[:, 5] * m * nn, sa, 1)
    Z_vv = np.tensordot(-mod[:, 4] * nn * nn, ca, 1) + np.tensordot(-mod[:, 5] * nn * nn, sa, 1)
    R_u = np.tensordot(-mod[:, 2] * m, sa, 1) + np.tensordot(mod[:, 3] * m, ca, 1)
    cv, sv = np.cos(np.asarray(v, dtype=float)), np.sin(np.asarray(v, dtype=float))
    r_uu = np.stack([R_uu * cv, R_uu * sv, Z_uu], axis=-1)
    r_uv = np.stack(
        [R_uv * cv - R_u * sv, R_uv * sv + R_u * cv, Z_uv], axis=-1
    )
    r_vv = np.stack(
        [R_vv * cv - 2 * R_v * sv - R * cv, R_vv * sv + 2 * R_v * cv - R * sv, Z_vv],
        axis=-1,
    )
    return r_uu, r_uv, r_vv


def surface_frame(surface: FourierSurface, u, v):
    """Outward unit normal and area element at (u, v).

    Returns
    -------
    n : ndarray (..., 3)
        Unit normal (orientation flag applied).
    g : ndarray (...)
        Area element |r_u x r_v|.
    """
    _, r_u, r_v = surface_eval(surface, u, v)
    nvec = np.cross(r_u, r_v) * surface.orientation
    g = np.linalg.norm(nvec, axis=-1)
    scale = np.linalg.norm(r_u, axis=-1) * np.linalg.norm(r_v, axis=-1)
    if np.any(g < 1e-14 * np.maximum(scale, np.finfo(float).tiny)):
        raise DegenerateSurfaceError("surface parameterization is degenerate: |r_u x r_v| ~ 0")
    return nvec / g[..., None], g


@dataclass(frozen=True)
class SurfaceGrid:
    """Uniform Nu x Nv tensor grid on a surface with precomputed geometry.

    Node (i, j) sits at (u_i, v_j) = (2 pi i / Nu, 2 pi j / Nv).  All node
    arrays have leading shape (Nu, Nv).
    """

    surface: FourierSurface
    Nu: int
    Nv: int
    u: np.ndarray
    v: np.ndarray
    r: np.ndarray
    r_u: np.ndarray
    r_v: np.ndarray
    normal: np.ndarray
    g: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return self.Nu * self.Nv

    @property
    def h_u(self) -> float:
        return 2 * np.pi / self.Nu

    @property
    def h_v(self) -> float:
        return 2 * np.pi / self.Nv

    def nodes_flat(self):
        """Positions as a (Nu*Nv, 3) C-contiguous array."""
        return np.ascontiguousarray(self.r.reshape(-1, 3))


def build_grid(surface: FourierSurface, Nu: int, Nv: int) -> SurfaceGrid:
    """Build a SurfaceGrid with positions, tangents, normals and area elements.

    Raises
    ------
    ValueError
        If Nu or Nv < 4.
    DegenerateSurfaceError
        If |r_u x r_v| vanishes at some node.
    """
    if Nu < 4 or Nv < 4:
        raise ValueError(f"Nu and Nv must be >= 4, got {Nu} x {Nv}")
    surface = surface.oriented()
    u = 2 * np.pi * np.arange(Nu) / Nu
    v = 2 * np.pi * np.arange(Nv) / Nv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    r, r_u, r_v = surface_eval(surface, uu, vv)
    nvec = np.cross(r_u, r_v) * surface.orientation
    g = np.linalg.norm(nvec, axis=-1)
    scale = np.linalg.norm(r_u, axis=-1) * np.linalg.norm(r_v, axis=-1)
    if np.any(g < 1e-14 * np.maximum(scale, np.finfo(float).tiny)):
        raise DegenerateSurfaceError("grid contains degenerate nodes with |r_u x r_v| ~ 0")
    return SurfaceGrid(
        surface=surface,
        Nu=Nu,
        Nv=Nv,
        u=u,
        v=v,
        r=r,
        r_u=r_u,
        r_v=r_v,
        normal=nvec / g[..., None],
        g=g,
    )


def builtin_surface(name: str) -> FourierSurface:
    """Named surfaces used throughout the experiments.

    ``circular_torus``
        Axisymmetric torus R = 2 + 0.5 cos u, Z = -0.5 sin u (nfp = 1).
    ``rotating_ellipse``
        A smooth 5-period stellarator-like surface:
        R = 5.5 + 0.8 cos u + 0.25 cos(u - 5v) + 0.05 cos(2u - 5v),
        Z = -0.8 sin u - 0.25 sin(u - 5v) - 0.05 sin(2u - 5v).
    """
    if name == "circular_torus":
        modes = [
            # m, n, rc, rs, zc, zs
            (0, 0, 2.0, 0.0, 0.0, 0.0),
            (1, 0, 0.5, 0.0, 0.0, -0.5),
        ]
        return FourierSurface(1, np.array(modes, dtype=float)).oriented()
    if name == "rotating_ellipse":
        modes = [
            (0, 0, 5.5, 0.0, 0.0, 0.0),
            (1, 0, 0.8, 0.0, 0.0, -0.8),
            (1, 1, 0.25, 0.0, 0.0, -0.25),
            (2, 1, 0.05, 0.0, 0.0, -0.05),
        ]
        return FourierSurface(5, np.array(modes, dtype=float)).oriented()
    raise ValueError(f"unknown builtin surface {name!r}")
