"""Periodic-grid numerics: trapezoidal quadrature, spectral differentiation,
Gauss-Legendre rules, and local tensor-product Lagrange interpolation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class GridFunction:
    """Samples of a k-component field on a Nu x Nv surface grid.

    ``values`` has shape (Nu, Nv) for scalars (k = 1) or (Nu, Nv, k) for
    vector fields, matching numpy's trailing-component convention.
    """

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim not in (2, 3):
            raise ValueError("GridFunction values must have shape (Nu, Nv) or (Nu, Nv, k)")

    @property
    def nu(self) -> int:
        return self.values.shape[0]

    @property
    def nv(self) -> int:
        return self.values.shape[1]

    @property
    def k(self) -> int:
        return 1 if self.values.ndim == 2 else self.values.shape[2]

    def validate(self, grid=None):
        """Check finiteness and, if a grid is given, shape consistency."""
        if not np.all(np.isfinite(self.values)):
            raise ValueError("GridFunction contains non-finite values")
        if grid is not None and (self.nu, self.nv) != (grid.Nu, grid.Nv):
            raise ValueError(
                f"GridFunction shape {(self.nu, self.nv)} does not match grid "
                f"{(grid.Nu, grid.Nv)}"
            )
        return self

    def copy(self) -> "GridFunction":
        return GridFunction(self.values.copy())


@dataclass(frozen=True)
class QuadRule1D:
    """1D quadrature rule on [-1, 1]: strictly increasing nodes, positive weights."""

    nodes: np.ndarray
    weights: np.ndarray


def trapezoid_integrate(f) -> float:
    """Periodic trapezoidal rule over [0, 2pi)^2: (2pi/Nu)(2pi/Nv) sum f_ij."""
    vals = f.values if isinstance(f, GridFunction) else np.asarray(f)
    Nu, Nv = vals.shape[:2]
    return float(vals.sum() * (2 * np.pi / Nu) * (2 * np.pi / Nv))


def gauss_legendre(n: int) -> QuadRule1D:
    """n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.

    Nodes are found by Newton iteration on the three-term Legendre
    recurrence, starting from the Chebyshev-based initial guess, converged
    to residual <= 1e-15.
    """
    if not 1 <= n <= 128:
        raise ValueError(f"gauss_legendre order must be in [1, 128], got {n}")
    if n == 1:
        return QuadRule1D(np.array([0.0]), np.array([2.0]))
    k = np.arange(n)
    x = -np.cos(np.pi * (k + 0.75) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        # p1 = P_n, p0 = P_{n-1}; derivative from the standard identity
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x -= dx
        if np.max(np.abs(p1)) <= 1e-15:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    return QuadRule1D(x, w)


def _wavenumbers(n: int) -> np.ndarray:
    """FFT wavenumbers with the Nyquist mode of the derivative zeroed."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return k


def fourier_diff(f, axis: str):
    """Spectral derivative of a periodic grid function along 'u' or 'v'."""
    gf = isinstance(f, GridFunction)
    vals = f.values if gf else np.asarray(f, dtype=float)
    ax = {"u": 0, "v": 1}[axis]
    n = vals.shape[ax]
    if n % 2 != 0:
        raise ValueError(f"fourier_diff requires an even number of points along {axis}")
    k = _wavenumbers(n)
    shape = [1] * vals.ndim
    shape[ax] = n
    fh = np.fft.fft(vals, axis=ax)
    fh *= 1j * k.reshape(shape)
    out = np.real(np.fft.ifft(fh, axis=ax))
    return GridFunction(out) if gf else out


def spectral_shift(vals: np.ndarray, du: float, dv: float) -> np.ndarray:
    """Evaluate a periodic grid function at nodes shifted by (du, dv).

    Uses the FFT phase shift; exact for band-limited data.  The Nyquist
    mode is shifted with its cosine part only so the result stays real.
    """
    vals = np.asarray(vals, dtype=float)
    Nu, Nv = vals.shape[:2]
    ku = np.fft.fftfreq(Nu, d=1.0 / Nu)
    kv = np.fft.fftfreq(Nv, d=1.0 / Nv)
    pu = np.exp(1j * ku * du)
    pv = np.exp(1j * kv * dv)
    if Nu % 2 == 0:
        pu[Nu // 2] = np.cos(Nu // 2 * du)
    if Nv % 2 == 0:
        pv[Nv // 2] = np.cos(Nv // 2 * dv)
    shape_u = [1] * vals.ndim
    shape_u[0] = Nu
    shape_v = [1] * vals.ndim
    shape_v[1] = Nv
    fh = np.fft.fft2(vals, axes=(0, 1))
    fh *= pu.reshape(shape_u) * pv.reshape(shape_v)
    return np.real(np.fft.ifft2(fh, axes=(0, 1)))


def _lagrange_start(t: np.ndarray, p: int, n: int) -> np.ndarray:
    """First index of the p-point stencil whose center is nearest t (grid units).

    Ties are broken toward the smaller index.
    """
    x = t - (p - 1) / 2.0
    return np.ceil(x - 0.5).astype(np.int64) % n


def _lagrange_weights(frac: np.ndarray, p: int) -> np.ndarray:
    """Lagrange weights on the uniform stencil {0, ..., p-1} at local coordinate frac.

    frac has arbitrary shape; the returned array has one trailing axis of
    length p.  Exact cardinal values are returned when frac is an integer
    node of the stencil.
    """
    frac = np.asarray(frac, dtype=float)
    out = np.empty(frac.shape + (p,))
    diffs = frac[..., None] - np.arange(p)  # (..., p)
    # prefix[k] = prod_{l<k} (t-l), suffix[k] = prod_{l>k} (t-l)
    prefix = np.ones_like(out)
    suffix = np.ones_like(out)
    for k in range(1, p):
        prefix[..., k] = prefix[..., k - 1] * diffs[..., k - 1]
        suffix[..., p - 1 - k] = suffix[..., p - k] * diffs[..., p - k]
    denom = np.array(
        [
            (-1.0) ** (p - 1 - k) * _factorial(k) * _factorial(p - 1 - k)
            for k in range(p)
        ]
    )
    out = prefix * suffix / denom
    # cardinal property: exact delta when frac coincides with a stencil node
    near = np.rint(frac)
    on_node = np.abs(frac - near) < 1e-14
    if np.any(on_node):
        idx = np.nonzero(on_node)
        out[idx] = 0.0
        out[idx + (near[idx].astype(int),)] = 1.0
    return out


def _factorial(k: int) -> float:
    out = 1.0
    for j in range(2, k + 1):
        out *= j
    return out


def lagrange_interp(f, targets, p: int):
    """Local tensor-product Lagrange interpolation with periodic wraparound.

    Parameters
    ----------
    f : GridFunction or ndarray (Nu, Nv) or (Nu, Nv, k)
        Samples on the uniform periodic grid.
    targets : ndarray, shape (nt, 2)
        (u, v) pairs.
    p : int
        Stencil order, 2 <= p <= 16 and p <= min(Nu, Nv).

    Returns
    -------
    ndarray, shape (nt,) or (nt, k)
    """
    vals = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)
    Nu, Nv = vals.shape[:2]
    if not 2 <= p <= 16:
        raise ValueError(f"interpolation order p must be in [2, 16], got {p}")
    if p > min(Nu, Nv):
        raise ValueError(f"interpolation order p={p} exceeds grid size {Nu}x{Nv}")
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    tu = targets[:, 0] * Nu / (2 * np.pi)
    tv = targets[:, 1] * Nv / (2 * np.pi)
    su = _lagrange_start(tu, p, Nu)
    sv = _lagrange_start(tv, p, Nv)
    # local coordinate measured from the stencil start, in grid units
    fu = (tu - su) % Nu
    fv = (tv - sv) % Nv
    wu = _lagrange_weights(fu, p)  # (nt, p)
    wv = _lagrange_weights(fv, p)
    iu = (su[:, None] + np.arange(p)) % Nu  # (nt, p)
    iv = (sv[:, None] + np.arange(p)) % Nv
    block = vals[iu[:, :, None], iv[:, None, :]]  # (nt, p, p, ...)
    out = np.einsum("ta,tb,tab...->t...", wu, wv, block)
    return out
