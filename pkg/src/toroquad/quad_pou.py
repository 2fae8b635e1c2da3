"""High-order quadrature for singular layer potentials on periodic grids.

The kernel K is split with a partition of unity built from a compactly
supported cutoff chi:

    K = K (1 - chi(d/eta))  +  K chi(d/eta),      d = sqrt(du^2 + dv^2)

with d the periodic parameter-space distance to the target.  The first
(globally smooth) part is summed with the trapezoidal rule over the grid;
the second (compactly supported) part is integrated in polar coordinates
centered on the target, where the Jacobian cancels the kernel singularity:
trapezoidal in the angle, Gauss-Legendre in the radius.  Odd (principal
value) kernel components cancel exactly in the symmetric angular rule.

For efficiency the polar radius is scaled per angle by the grid spacings
(the radial variable runs over [0, 1] along each ray, with the ray length
chosen so the cutoff support disk is covered exactly); this keeps the
angular integrand well resolved on strongly anisotropic surfaces without
changing the integral.  Densities and area elements are interpolated to the
polar nodes with local Lagrange stencils; surface geometry is evaluated
analytically from the Fourier series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._backend import sweeps
from .geom import SurfaceGrid
from .grid import GridFunction, _lagrange_start, _lagrange_weights, gauss_legendre

KERNELS = ("sl", "dl", "casing", "vecpot")


def chi(x, x0: float = 0.3):
    """C-infinity cutoff: 1 for x <= x0, 0 for x >= 1, monotone between.

    The transition is f(1-t) / (f(t) + f(1-t)) with f(s) = exp(-1/s) and
    t = (x - x0) / (1 - x0).
    """
    x = np.asarray(x, dtype=float)
    t = np.clip((x - x0) / (1.0 - x0), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)
        f1 = np.where(t < 1.0, np.exp(-1.0 / np.where(t < 1.0, 1.0 - t, 1.0)), 0.0)
    out = f1 / (f + f1)
    if out.ndim == 0:
        return float(out)
    return out


def _metric_aspects(grid: SurfaceGrid) -> np.ndarray:
    """Per-node anisotropy sqrt(lam_max / lam_min) of the first fundamental form."""
    ru = grid.r_u.reshape(-1, 3)
    rv = grid.r_v.reshape(-1, 3)
    A = np.einsum("ij,ij->i", ru, ru)
    B = np.einsum("ij,ij->i", ru, rv)
    C = np.einsum("ij,ij->i", rv, rv)
    tr = A + C
    disc = np.sqrt(np.maximum((A - C) ** 2 + 4 * B * B, 0.0))
    lam_hi = (tr + disc) / 2
    lam_lo = np.maximum((tr - disc) / 2, 1e-300)
    return np.sqrt(lam_hi / lam_lo)


def _polar_map_ratio(grid: SurfaceGrid):
    """Stretch ratio for the polar ray directions, and the resulting decay rate.

    The angular integrand has two families of complex singularities: those
    of the surface metric itself (distance artanh(ratio/aspect) when the ray
    map is stretched by `ratio`) and those introduced by the stretch
    (distance artanh(1/ratio)).  The best ratio balances the two; for a
    uniform aspect A it is sqrt(A), doubling the decay rate of the
    unstretched map.  Rays are denser along the metric's short axis.
    """
    aspects = _metric_aspects(grid)
    a_max = float(aspects.max())
    cands = np.geomspace(1.0, max(a_max, 1.0 + 1e-9), 65)

    def min_rate(ratio):
        y = np.minimum(ratio / aspects, aspects / ratio)
        r_metric = np.arctanh(np.minimum(y, 1 - 1e-12)).min()
        r_map = np.arctanh(min(1.0 / ratio, 1 - 1e-12)) if ratio > 1 else np.inf
        return min(r_metric, r_map)

    rates = [min_rate(c) for c in cands]
    k = int(np.argmax(rates))
    return float(cands[k]), float(rates[k])


@dataclass(frozen=True)
class PouConfig:
    """Parameters of the partition-of-unity scheme.

    Fields left at None are resolved per grid by `resolve`:

    - eta: support radius in parameter space.  With eta_rule='sqrt_h' it is
      4 sqrt(2 pi h_u) clamped to [8 h_u, pi/2]; with 'fixed' the given eta
      is used as-is.  Any eta up to pi is accepted (the cutoff vanishes at
      the support edge, so the patch never wraps onto itself).
    - n_theta: angular order, chosen so the slowest-decaying angular mode of
      the kernel is integrated below ~1e-12 (see _angular_rate), capped.
    - n_rho: radial order; the radial integrand is dominated by the cutoff
      transition, resolved by a few dozen Gauss-Legendre points regardless
      of grid size.
    """

    x0: float = 0.3
    eta: float | None = None
    p: int = 12
    n_theta: int | None = None
    n_rho: int | None = None
    eta_rule: str = "sqrt_h"
    n_theta_cap: int = 160
    n_rho_cap: int = 48

    def resolve(self, grid: SurfaceGrid) -> "PouConfig":
        """Fill in grid-dependent defaults and validate invariants."""
        Nu, Nv = grid.Nu, grid.Nv
        h_u = 2 * np.pi / Nu
        if self.eta_rule not in ("fixed", "sqrt_h"):
            raise ValueError(f"unknown eta_rule {self.eta_rule!r}")
        if self.eta is not None:
            eta = float(self.eta)
        elif self.eta_rule == "sqrt_h":
            eta = min(max(4.0 * math.sqrt(2 * np.pi * h_u), 8.0 * h_u), np.pi / 2)
        else:
            raise ValueError("eta_rule='fixed' requires an explicit eta")
        if self.n_theta is None:
            _, rate = _polar_map_ratio(grid)
            n_theta = min(max(16, math.ceil(28.0 / rate)), self.n_theta_cap)
        else:
            n_theta = self.n_theta
        n_theta += n_theta % 2
        points = eta / h_u
        n_rho = self.n_rho or min(max(8, 2 * math.ceil(points)), self.n_rho_cap)
        cfg = replace(self, eta=eta, n_theta=n_theta, n_rho=n_rho)
        cfg.validate()
        return cfg

    def validate(self):
        if not 0 < self.x0 < 1:
            raise ValueError(f"x0 must be in (0, 1), got {self.x0}")
        if self.eta is not None and not 0 < self.eta <= np.pi:
            raise ValueError(f"eta must be in (0, pi], got {self.eta}")
        if self.n_theta is not None and (self.n_theta < 8 or self.n_theta % 2):
            raise ValueError(f"n_theta must be even and >= 8, got {self.n_theta}")
        if self.n_rho is not None and not 2 <= self.n_rho <= 128:
            raise ValueError(f"n_rho must be in [2, 128], got {self.n_rho}")
        if self.p < 2:
            raise ValueError(f"interpolation order must be >= 2, got {self.p}")


class LayerEvaluator:
    """Precomputed tables for repeated layer-potential sweeps on one grid.

    Building the tables costs O(N); each call then runs the smooth O(N^2)
    sweep plus the local polar sweep.  Instances are immutable after
    construction and safe to reuse across GMRES iterations.
    """

    def __init__(self, grid: SurfaceGrid, kernel: str, cfg: PouConfig):
        if kernel not in KERNELS:
            raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
        self.grid = grid
        self.kernel = kernel
        self.cfg = cfg.resolve(grid)
        if self.cfg.p > min(grid.Nu, grid.Nv):
            raise ValueError(
                f"interpolation order p={self.cfg.p} exceeds grid {grid.Nu}x{grid.Nv}"
            )
        self._build_window()
        self._build_polar()
        self._target_tables()

    # -- setup ------------------------------------------------------------

    def _build_window(self):
        g = self.grid
        eta, x0 = self.cfg.eta, self.cfg.x0
        # clip at the half-period; offsets there are >= eta where chi = 0
        Ku = min(int(np.ceil(eta / g.h_u)), g.Nu // 2)
        Kv = min(int(np.ceil(eta / g.h_v)), g.Nv // 2)
        au = np.arange(-Ku, Ku + 1) * g.h_u
        av = np.arange(-Kv, Kv + 1) * g.h_v
        dist = np.sqrt(au[:, None] ** 2 + av[None, :] ** 2)
        self.Ku, self.Kv = Ku, Kv
        self.chiwin = chi(dist / eta, x0)
        # half-width of the nonzero band per window row (-1: row is all zero)
        nz = self.chiwin > 0.0
        self.win_half = np.where(
            nz.any(axis=1), nz.sum(axis=1) // 2, -1
        ).astype(np.int64)

    def _build_polar(self):
        g = self.grid
        cfg = self.cfg
        eta, p = cfg.eta, cfg.p
        nt, nr = cfg.n_theta, cfg.n_rho
        rule = gauss_legendre(nr)
        xk = 0.5 * (rule.nodes + 1.0)  # radial variable on (0, 1)
        wk = 0.5 * rule.weights
        omega = 2 * np.pi * np.arange(nt) / nt
        # rays have unit speed in parameter space (the radial variable is the
        # parameter distance) but their directions are spread anisotropically,
        # denser along the metric's short axis, to keep the angular integrand
        # well resolved on strongly anisotropic surfaces
        ratio, _ = _polar_map_ratio(g)
        ru2 = np.einsum("ijk,ijk->ij", g.r_u, g.r_u)
        rv2 = np.einsum("ijk,ijk->ij", g.r_v, g.r_v)
        if np.median(rv2) >= np.median(ru2):  # rays denser along the short (u) axis
            s_u, s_v = 1.0, 1.0 / ratio
        else:
            s_u, s_v = 1.0 / ratio, 1.0
        m_ang = np.sqrt((s_u * np.cos(omega)) ** 2 + (s_v * np.sin(omega)) ** 2)
        rho = eta * np.broadcast_to(xk, (nt, nr)).copy()  # (nt, nr)
        du = rho * (s_u * np.cos(omega))[:, None] / m_ang[:, None]
        dv = rho * (s_v * np.sin(omega))[:, None] / m_ang[:, None]
        # d(du, dv) = (s_u s_v / m^2) rho drho domega; chi argument = rho/eta = x
        jac = s_u * s_v / m_ang[:, None] ** 2
        W = (2 * np.pi / nt) * (eta * wk[None, :]) * rho * jac * chi(xk, cfg.x0)[None, :]

        self.duq = du.ravel()
        self.dvq = dv.ravel()
        self.Wq = W.ravel()

        # Lagrange stencils: offsets are target-independent
        tu = self.duq / g.h_u
        tv = self.dvq / g.h_v
        su = np.ceil(tu - (p - 1) / 2.0 - 0.5).astype(np.int64)
        sv = np.ceil(tv - (p - 1) / 2.0 - 0.5).astype(np.int64)
        self.wu = np.ascontiguousarray(_lagrange_weights(tu - su, p))
        self.wv = np.ascontiguousarray(_lagrange_weights(tv - sv, p))
        self.su = su % g.Nu
        self.sv = sv % g.Nv

        # per-node mode phase increments for angle addition
        surf = g.surface
        mm = surf.m
        nn = surf.n * surf.nfp
        darg = np.multiply.outer(self.duq, mm) - np.multiply.outer(self.dvq, nn)
        self.cmd = np.ascontiguousarray(np.cos(darg))
        self.smd = np.ascontiguousarray(np.sin(darg))
        self.cdv = np.cos(self.dvq)
        self.sdv = np.sin(self.dvq)

    def _target_tables(self):
        g = self.grid
        cache = g._cache
        if "mode_trig" not in cache:
            surf = g.surface
            mm = surf.m
            nn = surf.n * surf.nfp
            uu, vv = np.meshgrid(g.u, g.v, indexing="ij")
            arg = (np.multiply.outer(uu, mm) - np.multiply.outer(vv, nn)).reshape(
                -1, mm.shape[0]
            )
            cache["mode_trig"] = (
                np.ascontiguousarray(np.cos(arg)),
                np.ascontiguousarray(np.sin(arg)),
                np.cos(vv).ravel(),
                np.sin(vv).ravel(),
            )
        self.ct, self.st, self.cv, self.sv_t = cache["mode_trig"]
        pts = g.nodes_flat()
        self.xs = np.ascontiguousarray(pts[:, 0])
        self.ys = np.ascontiguousarray(pts[:, 1])
        self.zs = np.ascontiguousarray(pts[:, 2])
        nrm = g.normal.reshape(-1, 3)
        self.tn = [np.ascontiguousarray(nrm[:, k]) for k in range(3)]
        surf = g.surface
        self.mode_arrays = (
            np.ascontiguousarray(surf.m),
            np.ascontiguousarray(surf.n * surf.nfp),
            np.ascontiguousarray(surf.modes[:, 2]),
            np.ascontiguousarray(surf.modes[:, 3]),
            np.ascontiguousarray(surf.modes[:, 4]),
            np.ascontiguousarray(surf.modes[:, 5]),
        )
        self.sign = float(surf.orientation)
        self.gflat = np.ascontiguousarray(g.g.ravel())

    # -- evaluation --------------------------------------------------------

    def _payload(self, sigma: np.ndarray):
        """Flat source payload(s) for the configured kernel."""
        g = self.grid
        if self.kernel in ("sl", "dl"):
            if sigma.shape != (g.Nu, g.Nv):
                raise ValueError("scalar kernels need sigma of shape (Nu, Nv)")
            return [np.ascontiguousarray(sigma.ravel())]
        if sigma.shape != (g.Nu, g.Nv, 3):
            raise ValueError("vector kernels need a payload of shape (Nu, Nv, 3)")
        flat = sigma.reshape(-1, 3)
        return [np.ascontiguousarray(flat[:, k]) for k in range(3)]

    def smooth_part(self, sigma: np.ndarray) -> np.ndarray:
        """Trapezoidal sum of the (1 - chi) part over all grid nodes."""
        g = self.grid
        w_cell = g.h_u * g.h_v
        pay = self._payload(np.asarray(sigma, dtype=float))
        args = (self.xs, self.ys, self.zs)
        if self.kernel == "sl":
            out = np.empty(g.n_nodes)
            sweeps.smooth_sl(*args, pay[0] * self.gflat * w_cell,
                             g.Nv, self.Ku, self.Kv, self.chiwin, self.win_half, out)
            return out.reshape(g.Nu, g.Nv)
        if self.kernel == "dl":
            wsrc = self.gflat * w_cell * pay[0]
            out = np.empty(g.n_nodes)
            sweeps.smooth_dl(*args, self.tn[0] * wsrc, self.tn[1] * wsrc,
                             self.tn[2] * wsrc, g.Nv, self.Ku, self.Kv,
                             self.chiwin, self.win_half, out)
            return out.reshape(g.Nu, g.Nv)
        wcell = self.gflat * w_cell
        wx, wy, wz = (p * wcell for p in pay)
        if self.kernel == "casing":
            out = np.empty(g.n_nodes)
            sweeps.smooth_casing(*args, wx, wy, wz, *self.tn,
                                 g.Nv, self.Ku, self.Kv, self.chiwin,
                                 self.win_half, out)
            return out.reshape(g.Nu, g.Nv)
        outs = [np.empty(g.n_nodes) for _ in range(3)]
        sweeps.smooth_vecpot(*args, wx, wy, wz, g.Nv, self.Ku, self.Kv,
                             self.chiwin, self.win_half, *outs)
        return np.stack(outs, axis=-1).reshape(g.Nu, g.Nv, 3)

    def singular_part(self, sigma: np.ndarray) -> np.ndarray:
        """Polar-coordinate quadrature of the chi part around each node."""
        g = self.grid
        pay = self._payload(np.asarray(sigma, dtype=float))
        tab = (self.Wq, self.su, self.sv, self.wu, self.wv,
               self.cmd, self.smd, self.cdv, self.sdv)
        common = (self.ct, self.st, self.cv, self.sv_t)
        if self.kernel == "sl":
            out = np.empty(g.n_nodes)
            sweeps.singular_sl(self.xs, self.ys, self.zs, pay[0], self.gflat,
                               *common, *self.mode_arrays, self.sign, *tab,
                               g.Nv, self.cfg.p, out)
            return out.reshape(g.Nu, g.Nv)
        if self.kernel == "dl":
            out = np.empty(g.n_nodes)
            sweeps.singular_dl(self.xs, self.ys, self.zs, pay[0], self.gflat,
                               *common, *self.mode_arrays, self.sign, *tab,
                               g.Nv, self.cfg.p, out)
            return out.reshape(g.Nu, g.Nv)
        if self.kernel == "casing":
            out = np.empty(g.n_nodes)
            sweeps.singular_casing(self.xs, self.ys, self.zs, *pay, self.gflat,
                                   *self.tn, *common, *self.mode_arrays,
                                   self.sign, *tab, g.Nv, self.cfg.p, out)
            return out.reshape(g.Nu, g.Nv)
        outs = [np.empty(g.n_nodes) for _ in range(3)]
        sweeps.singular_vecpot(self.xs, self.ys, self.zs, *pay, self.gflat,
                               *common, *self.mode_arrays, self.sign, *tab,
                               g.Nv, self.cfg.p, *outs)
        return np.stack(outs, axis=-1).reshape(g.Nu, g.Nv, 3)

    def __call__(self, sigma: np.ndarray, prefactor: float = 1.0) -> np.ndarray:
        return prefactor * (self.smooth_part(sigma) + self.singular_part(sigma))


def smooth_part_eval(grid: SurfaceGrid, sigma, kernel: str, cfg: PouConfig):
    """Smooth-part trapezoidal sweep; see LayerEvaluator for repeated use."""
    vals = sigma.values if isinstance(sigma, GridFunction) else sigma
    return LayerEvaluator(grid, kernel, cfg).smooth_part(vals)


def singular_part_eval(grid: SurfaceGrid, sigma, kernel: str, cfg: PouConfig):
    """Singular-part polar sweep; see LayerEvaluator for repeated use."""
    vals = sigma.values if isinstance(sigma, GridFunction) else sigma
    return LayerEvaluator(grid, kernel, cfg).singular_part(vals)


def layer_potential_eval(grid: SurfaceGrid, sigma, kernel: str, cfg: PouConfig,
                         prefactor: float = 1.0):
    """Full layer potential (smooth + singular parts) at every grid node.

    Returns a GridFunction when given one, else a bare array.  The raw
    integral over the parameter square is returned scaled by ``prefactor``
    (callers apply 1/4pi, 1/2pi, ... as their equation requires).
    """
    gf = isinstance(sigma, GridFunction)
    vals = sigma.values if gf else np.asarray(sigma, dtype=float)
    out = LayerEvaluator(grid, kernel, cfg)(vals, prefactor)
    return GridFunction(out) if gf else out
