"""Pointwise kernels for layer potentials and Biot-Savart line integrals.

All surface kernels are returned *without* their 1/4pi or 1/2pi prefactors;
each caller applies the prefactor its equation requires.  mu_0 = 1
internally; SI scaling is applied at the reporting layer only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CoincidentPointError(ValueError):
    """Target coincides with a source point of a singular kernel."""


def _sep(r, r_src):
    d = np.asarray(r, dtype=float) - np.asarray(r_src, dtype=float)
    dist = np.linalg.norm(d, axis=-1)
    if np.any(dist == 0.0):
        raise CoincidentPointError("kernel evaluated at coincident points")
    return d, dist


def laplace_sl(r, r_src):
    """Single-layer Laplace kernel 1 / (4 pi |r - r'|)."""
    _, dist = _sep(r, r_src)
    return 1.0 / (4 * np.pi * dist)


def laplace_dl(r, r_src, n_src):
    """Double-layer Laplace kernel n' . (r - r') / |r - r'|^3 (unprefactored)."""
    d, dist = _sep(r, r_src)
    return np.sum(np.asarray(n_src) * d, axis=-1) / dist**3


def casing_bn_kernel(r, n_r, r_src, nxB):
    """Normal projection of the sheet-current field kernel.

    Returns n(r) . [ nxB x (r - r') ] / |r - r'|^3, the integrand of the
    surface form of the field decomposition (no 1/4pi).
    """
    d, dist = _sep(r, r_src)
    return np.sum(np.asarray(n_r) * np.cross(np.asarray(nxB), d), axis=-1) / dist**3


def vecpot_kernel(r, r_src, nxB):
    """Vector-potential kernel nxB / |r - r'| (unprefactored)."""
    _, dist = _sep(r, r_src)
    return np.asarray(nxB) / dist[..., None]


@dataclass(frozen=True)
class CurrentLoop:
    """Closed space curve carrying a current, stored as a Fourier series.

    x(t) = sum_k xc_k cos(k t) + xs_k sin(k t), and likewise for y and z,
    with t in [0, 2pi).  Tangents are analytic derivatives of the series.

    Parameters
    ----------
    coeffs : ndarray, shape (nmodes, 7)
        Rows (k, xc, xs, yc, ys, zc, zs).
    current : float
    n_samples : int
        Number of uniformly spaced quadrature samples (>= 16).
    """

    coeffs: np.ndarray
    current: float
    n_samples: int = 256

    def __post_init__(self):
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if coeffs.shape[1] != 7:
            raise ValueError("loop coeffs must have columns (k, xc, xs, yc, ys, zc, zs)")
        if self.n_samples < 16:
            raise ValueError("a current loop needs at least 16 samples")
        object.__setattr__(self, "coeffs", coeffs)

    def eval(self, t):
        """Positions and tangents gamma(t), gamma'(t); shapes (..., 3)."""
        t = np.asarray(t, dtype=float)
        k = self.coeffs[:, 0]
        arg = np.multiply.outer(k, t)
        c, s = np.cos(arg), np.sin(arg)
        pos = np.stack(
            [
                np.tensordot(self.coeffs[:, 1 + 2 * a], c, 1)
                + np.tensordot(self.coeffs[:, 2 + 2 * a], s, 1)
                for a in range(3)
            ],
            axis=-1,
        )
        tan = np.stack(
            [
                np.tensordot(-self.coeffs[:, 1 + 2 * a] * k, s, 1)
                + np.tensordot(self.coeffs[:, 2 + 2 * a] * k, c, 1)
                for a in range(3)
            ],
            axis=-1,
        )
        return pos, tan

    def samples(self):
        """Cached uniform samples (positions, tangents) over one period."""
        t = 2 * np.pi * np.arange(self.n_samples) / self.n_samples
        return self.eval(t)


def circle_loop(radius: float, current: float, center=(0.0, 0.0, 0.0),
                plane: str = "xy", n_samples: int = 256) -> CurrentLoop:
    """Circular loop of given radius; ``plane`` is 'xy' (axis z) or 'xz' (axis y)."""
    cx, cy, cz = center
    if plane == "xy":
        coeffs = [
            (0, cx, 0, cy, 0, cz, 0),
            (1, radius, 0, 0, radius, 0, 0),
        ]
    elif plane == "xz":
        coeffs = [
            (0, cx, 0, cy, 0, cz, 0),
            (1, radius, 0, 0, 0, 0, radius),
        ]
    else:
        raise ValueError(f"unknown plane {plane!r}")
    return CurrentLoop(np.array(coeffs, dtype=float), current, n_samples)


def biot_savart_loop(loop: CurrentLoop, r, mu0: float = 1.0):
    """Magnetic field of a closed current loop at targets r.

    (mu0 I / 4pi) oint dl' x (r - r') / |r - r'|^3 by the trapezoidal rule
    over the loop parameter; spectrally accurate for smooth loops.

    Raises
    ------
    CoincidentPointError
        If a target lies within 1e-10 of the sampled loop.
    """
    r = np.asarray(r, dtype=float)
    single = r.ndim == 1
    pts = np.atleast_2d(r)
    pos, tan = loop.samples()
    out = np.empty((pts.shape[0], 3))
    # blocked over targets to bound the (block, M, 3) temporaries
    block = max(1, int(2e6 // loop.n_samples))
    for a in range(0, pts.shape[0], block):
        b = min(a + block, pts.shape[0])
        d = pts[a:b, None, :] - pos[None, :, :]
        dist = np.linalg.norm(d, axis=-1)
        if dist.min() < 1e-10:
            raise CoincidentPointError("Biot-Savart target lies on the loop")
        integrand = np.cross(tan[None, :, :], d) / dist[:, :, None] ** 3
        out[a:b] = integrand.sum(axis=1)
    out *= mu0 * loop.current / (4 * np.pi) * (2 * np.pi / loop.n_samples)
    return out[0] if single else out
