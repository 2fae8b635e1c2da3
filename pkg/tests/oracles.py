"""Independent reference computations used to freeze expected test values.

Everything here deliberately avoids the package's quadrature machinery:
adaptive quadrature (scipy), series expansions, finite differences.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from toroquad.geom import surface_eval, surface_frame
from toroquad.quad_pou import chi


def bessel_i0_series(x: float, terms: int = 60) -> float:
    """Modified Bessel I0 by its power series."""
    out = 0.0
    term = 1.0
    for k in range(terms):
        if k > 0:
            term *= (x / (2 * k)) ** 2
        out += term
    return out


def cell_rsqrt_integral(E: float, F: float, G: float, eps: float = 1e-3) -> float:
    """Adaptive 2D integral of 1/R over [-pi, pi]^2 with singularity excision.

    Integrates in polar coordinates outside a disk of radius eps and
    Richardson-extrapolates eps -> 0 (the excised part is linear in eps).
    """

    def rho_max(theta: float) -> float:
        c, s = np.cos(theta), np.sin(theta)
        return np.pi / max(abs(c), abs(s))

    def integral(e: float) -> float:
        def outer(theta: float) -> float:
            c, s = np.cos(theta), np.sin(theta)
            alpha = np.sqrt(E * c * c + 2 * F * c * s + G * s * s)

            def inner(rho: float) -> float:
                return rho / (rho * alpha)

            val, _ = quad(inner, e, rho_max(theta), epsabs=1e-13, epsrel=1e-13)
            return val

        val, _ = quad(outer, 0.0, 2 * np.pi, epsabs=1e-12, epsrel=1e-12, limit=400)
        return val

    i1 = integral(eps)
    i2 = integral(eps / 2)
    return 2 * i2 - i1


def _polar_geometry(surface, u0, v0, rho, theta):
    u = u0 + rho * np.cos(theta)
    v = v0 + rho * np.sin(theta)
    r, r_u, r_v = surface_eval(surface, u, v)
    nvec = np.cross(r_u, r_v) * surface.orientation
    g = np.linalg.norm(nvec, axis=-1)
    return r, nvec / np.maximum(g, 1e-300)[..., None], g


def singular_patch_integral(surface, u0, v0, eta, x0, kernel, sigma_fn=None,
                            epsabs=1e-12):
    """chi-weighted kernel integral over the polar patch, by nested adaptive quad.

    kernel is 'sl' or 'dl'; sigma_fn(u, v) defaults to 1.  Integrates
    int_0^2pi int_0^eta  rho K(...) chi(rho/eta) sigma g  drho dtheta
    in plain (isotropic) polar coordinates about the target node.
    """
    r0, _, _ = _polar_geometry(surface, u0, v0, 0.0, 0.0)

    def integrand(rho: float, theta: float) -> float:
        r, n, g = _polar_geometry(surface, u0, v0, rho, theta)
        d = r0 - r
        dist = np.linalg.norm(d)
        if kernel == "sl":
            k = 1.0 / dist
        elif kernel == "dl":
            k = float(n @ d) / dist**3
        else:
            raise ValueError(kernel)
        sig = 1.0 if sigma_fn is None else sigma_fn(
            u0 + rho * np.cos(theta), v0 + rho * np.sin(theta))
        return rho * k * chi(rho / eta, x0) * sig * g

    def outer(theta: float) -> float:
        val, _ = quad(integrand, 0.0, eta, args=(theta,), epsabs=epsabs,
                      epsrel=epsabs, limit=200)
        return val

    val, _ = quad(outer, 0.0, 2 * np.pi, epsabs=epsabs * 10, epsrel=epsabs * 10,
                  limit=200)
    return val


def surface_sl_integral(surface, u0, v0, sigma_fn=None, epsabs=1e-11):
    """Full single-layer integral over the surface at one on-surface target.

    int sigma g / |r0 - r'| du' dv' over the centered cell, in polar
    coordinates about the target so the singularity is cancelled by the
    Jacobian.  Unprefactored (multiply by 1/4pi for the potential).
    """
    r0, _, _ = _polar_geometry(surface, u0, v0, 0.0, 0.0)

    def rho_max(theta: float) -> float:
        c, s = np.cos(theta), np.sin(theta)
        return np.pi / max(abs(c), abs(s))

    def integrand(rho: float, theta: float) -> float:
        r, _, g = _polar_geometry(surface, u0, v0, rho, theta)
        dist = np.linalg.norm(r0 - r)
        sig = 1.0 if sigma_fn is None else sigma_fn(
            u0 + rho * np.cos(theta), v0 + rho * np.sin(theta))
        return rho * sig * g / dist

    def outer(theta: float) -> float:
        val, _ = quad(integrand, 0.0, rho_max(theta), args=(theta,),
                      epsabs=epsabs, epsrel=epsabs, limit=200)
        return val

    val, _ = quad(outer, 0.0, 2 * np.pi, epsabs=epsabs * 30, epsrel=epsabs * 30,
                  limit=400)
    return val


def loop_dipole_field(moment_z: float, center, r) -> np.ndarray:
    """Point magnetic dipole field (mu0 = 1), moment along z."""
    d = np.asarray(r, dtype=float) - np.asarray(center, dtype=float)
    dist = np.linalg.norm(d)
    m = np.array([0.0, 0.0, moment_z])
    return (3 * d * (m @ d) / dist**5 - m / dist**3) / (4 * np.pi)
