"""Pure-numpy fallback for the sweep kernels in _sweeps_numba.

Same public signatures, vectorized with blocked broadcasting.  Chosen via
TOROQUAD_BACKEND=numpy (or automatically when numba is unavailable); see
_backend.  Intended for correctness checks and modest grid sizes, and as
the reference side of the backend benchmark.
"""

import numpy as np

_PAIR_BUDGET = 4_000_000


def _blocks(n_targets, n_sources):
    b = max(1, _PAIR_BUDGET // max(n_sources, 1))
    for a in range(0, n_targets, b):
        yield a, min(a + b, n_targets)


def _roll_flat(arr2d, a, b):
    return np.roll(np.roll(arr2d, -a, axis=0), -b, axis=1).ravel()


def _window_offsets(Ku, Kv, chiwin):
    offs = []
    for a in range(-Ku, Ku + 1):
        for b in range(-Kv, Kv + 1):
            c = chiwin[a + Ku, b + Kv]
            if c != 0.0 and not (a == 0 and b == 0):
                offs.append((a, b, c))
    return offs


def smooth_sl(xs, ys, zs, w, Nv, Ku, Kv, chiwin, win_half, out):
    n = xs.shape[0]
    Nu = n // Nv
    pts = np.stack([xs, ys, zs], axis=1)
    for a, b in _blocks(n, n):
        d = pts[a:b, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", d, d)
        d2[d2 == 0.0] = 1.0
        out[a:b] = (w[None, :] / np.sqrt(d2)).sum(axis=1)
    out -= w
    shp = (Nu, Nv)
    x2, y2, z2, w2 = (arr.reshape(shp) for arr in (xs, ys, zs, w))
    for a, b, c in _window_offsets(Ku, Kv, chiwin):
        dx = xs - _roll_flat(x2, a, b)
        dy = ys - _roll_flat(y2, a, b)
        dz = zs - _roll_flat(z2, a, b)
        out -= c * _roll_flat(w2, a, b) / np.sqrt(dx * dx + dy * dy + dz * dz)


def smooth_dl(xs, ys, zs, wx, wy, wz, Nv, Ku, Kv, chiwin, win_half, out):
    n = xs.shape[0]
    Nu = n // Nv
    pts = np.stack([xs, ys, zs], axis=1)
    wv = np.stack([wx, wy, wz], axis=1)
    for a, b in _blocks(n, n):
        d = pts[a:b, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", d, d)
        d2[d2 == 0.0] = 1.0
        num = np.einsum("jk,ijk->ij", wv, d)
        out[a:b] = (num / (d2 * np.sqrt(d2))).sum(axis=1)
    shp = (Nu, Nv)
    arrs = [arr.reshape(shp) for arr in (xs, ys, zs, wx, wy, wz)]
    for a, b, c in _window_offsets(Ku, Kv, chiwin):
        x2, y2, z2, wx2, wy2, wz2 = (_roll_flat(t, a, b) for t in arrs)
        dx = xs - x2
        dy = ys - y2
        dz = zs - z2
        d2 = dx * dx + dy * dy + dz * dz
        out -= c * (wx2 * dx + wy2 * dy + wz2 * dz) / (d2 * np.sqrt(d2))


def smooth_casing(xs, ys, zs, wx, wy, wz, tnx, tny, tnz, Nv, Ku, Kv, chiwin,
                  win_half, out):
    n = xs.shape[0]
    Nu = n // Nv
    pts = np.stack([xs, ys, zs], axis=1)
    wv = np.stack([wx, wy, wz], axis=1)
    nt = np.stack([tnx, tny, tnz], axis=1)
    for a, b in _blocks(n, n):
        d = pts[a:b, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", d, d)
        d2[d2 == 0.0] = 1.0
        cr = np.cross(wv[None, :, :], d)
        num = np.einsum("ik,ijk->ij", nt[a:b], cr)
        out[a:b] = (num / (d2 * np.sqrt(d2))).sum(axis=1)
    shp = (Nu, Nv)
    arrs = [arr.reshape(shp) for arr in (xs, ys, zs, wx, wy, wz)]
    for a, b, c in _window_offsets(Ku, Kv, chiwin):
        x2, y2, z2, wx2, wy2, wz2 = (_roll_flat(t, a, b) for t in arrs)
        dx = xs - x2
        dy = ys - y2
        dz = zs - z2
        d2 = dx * dx + dy * dy + dz * dz
        num = (tnx * (wy2 * dz - wz2 * dy)
               + tny * (wz2 * dx - wx2 * dz)
               + tnz * (wx2 * dy - wy2 * dx))
        out -= c * num / (d2 * np.sqrt(d2))


def smooth_vecpot(xs, ys, zs, wx, wy, wz, Nv, Ku, Kv, chiwin, win_half,
                  outx, outy, outz):
    n = xs.shape[0]
    Nu = n // Nv
    pts = np.stack([xs, ys, zs], axis=1)
    for a, b in _blocks(n, n):
        d = pts[a:b, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", d, d)
        d2[d2 == 0.0] = 1.0
        inv = 1.0 / np.sqrt(d2)
        outx[a:b] = inv @ wx
        outy[a:b] = inv @ wy
        outz[a:b] = inv @ wz
    outx -= wx
    outy -= wy
    outz -= wz
    shp = (Nu, Nv)
    arrs = [arr.reshape(shp) for arr in (xs, ys, zs, wx, wy, wz)]
    for a, b, c in _window_offsets(Ku, Kv, chiwin):
        x2, y2, z2, wx2, wy2, wz2 = (_roll_flat(t, a, b) for t in arrs)
        dx = xs - x2
        dy = ys - y2
        dz = zs - z2
        inv = c / np.sqrt(dx * dx + dy * dy + dz * dz)
        outx -= wx2 * inv
        outy -= wy2 * inv
        outz -= wz2 * inv


# ---------------------------------------------------------------------------
# singular polar sweeps
# ---------------------------------------------------------------------------

def _interp_all(F2, iu_all, iv_all, su_q, sv_q, wu_q, wv_q, Nu, Nv, p):
    """Interpolate field F2 (Nu, Nv) for every target at one polar node."""
    iu = (iu_all[:, None] + su_q + np.arange(p)) % Nu  # (n, p)
    iv = (iv_all[:, None] + sv_q + np.arange(p)) % Nv
    block = F2[iu[:, :, None], iv[:, None, :]]
    return np.einsum("a,b,tab->t", wu_q, wv_q, block)


def _surf_points_all(mm, nn, rc, rs, zc, zs_, sign, ct, st, cv, sv,
                     cmd_q, smd_q, cdv_q, sdv_q):
    c = ct * cmd_q[None, :] - st * smd_q[None, :]  # (n, M)
    s = st * cmd_q[None, :] + ct * smd_q[None, :]
    R = c @ rc + s @ rs
    Z = c @ zc + s @ zs_
    Ru = (c @ (mm * rs)) - (s @ (mm * rc))
    Rv = (s @ (nn * rc)) - (c @ (nn * rs))
    Zu = (c @ (mm * zs_)) - (s @ (mm * zc))
    Zv = (s @ (nn * zc)) - (c @ (nn * zs_))
    cvp = cv * cdv_q - sv * sdv_q
    svp = sv * cdv_q + cv * sdv_q
    x = R * cvp
    y = R * svp
    xu = Ru * cvp
    yu = Ru * svp
    xv = Rv * cvp - R * svp
    yv = Rv * svp + R * cvp
    nx = (yu * Zv - Zu * yv) * sign
    ny = (Zu * xv - xu * Zv) * sign
    nz = (xu * yv - yu * xv) * sign
    ga = np.sqrt(nx * nx + ny * ny + nz * nz)
    return x, y, Z, nx, ny, nz, ga


def singular_sl(xs, ys, zs, F, G, ct, st, cv, sv,
                mm, nn, rc, rs, zc, zs_, sign,
                W, su, sv_, wu, wv, cmd, smd, cdv, sdv,
                Nv, p, out):
    n = xs.shape[0]
    Nu = n // Nv
    iu_all = np.arange(n) // Nv
    iv_all = np.arange(n) % Nv
    F2 = F.reshape(Nu, Nv)
    G2 = G.reshape(Nu, Nv)
    out[:] = 0.0
    for q in range(W.shape[0]):
        sig = _interp_all(F2, iu_all, iv_all, su[q], sv_[q], wu[q], wv[q], Nu, Nv, p)
        gq = _interp_all(G2, iu_all, iv_all, su[q], sv_[q], wu[q], wv[q], Nu, Nv, p)
        x, y, z, nx, ny, nz, ga = _surf_points_all(
            mm, nn, rc, rs, zc, zs_, sign, ct, st, cv, sv,
            cmd[q], smd[q], cdv[q], sdv[q])
        dist = np.sqrt((xs - x) ** 2 + (ys - y) ** 2 + (zs - z) ** 2)
        out += W[q] * sig * gq / dist


def singular_dl(xs, ys, zs, F, G, ct, st, cv, sv,
                mm, nn, rc, rs, zc, zs_, sign,
                W, su, sv_, wu, wv, cmd, smd, cdv, sdv,
                Nv, p, out):
    n = xs.shape[0]
    Nu = n // Nv
    iu_all = np.arange(n) // Nv
    iv_all = np.arange(n) % Nv
    F2 = F.reshape(Nu, Nv)
    G2 = G.reshape(Nu, Nv)
    out[:] = 0.0
    for q in range(W.shape[0]):
        sig = _interp_all(F2, iu_all, iv_all, su[q], sv_[q], wu[q], wv[q], Nu, Nv, p)
        gq = _interp_all(G2, iu_all, iv_all, su[q], sv_[q], wu[q], wv[q], Nu, Nv, p)
        x, y, z, nx, ny, nz, ga = _surf_points_all(
            mm, nn, rc, rs, zc, zs_, sign, ct, st, cv, sv,
            cmd[q], smd[q], cdv[q], sdv[q])
        dx = xs - x
        dy = ys - y
        dz = zs - z
        d2 = dx * dx + dy * dy + dz * dz
        ndotd = (nx * dx + ny * dy + nz * dz) / ga
        out += W[q] * sig * gq * ndotd / (d2 * np.sqrt(d2))


def singular_casing(xs, ys, zs, Qx, Qy, Qz, G, tnx, tny, tnz, ct, st, cv, sv,
                    mm, nn, rc, rs, zc, zs_, sign,
                    W, su, sv_, wu, wv, cmd, smd, cdv, sdv,
                    Nv, p, out):
    n = xs.shape[0]
    Nu = n // Nv
    iu_all = np.arange(n) // Nv
    iv_all = np.arange(n) % Nv
    fields = [arr.reshape(Nu, Nv) for arr in (Qx, Qy, Qz, G)]
    out[:] = 0.0
    for q in range(W.shape[0]):
        qx, qy, qz, gq = (
            _interp_all(F2, iu_all, iv_all, su[q], sv_[q], wu[q], wv[q], Nu, Nv, p)
            for F2 in fields
        )
        x, y, z, nx, ny, nz, ga = _surf_points_all(
            mm, nn, rc, rs, zc, zs_, sign, ct, st, cv, sv,
            cmd[q], smd[q], cdv[q], sdv[q])
        dx = xs - x
        dy = ys - y
        dz = zs - z
        d2 = dx * dx + dy * dy + dz * dz
        num = (tnx * (qy * dz - qz * dy)
               + tny * (qz * dx - qx * dz)
               + tnz * (qx * dy - qy * dx))
        out += W[q] * gq * num / (d2 * np.sqrt(d2))


def singular_vecpot(xs, ys, zs, Qx, Qy, Qz, G, ct, st, cv, sv,
                    mm, nn, rc, rs, zc, zs_, sign,
                    W, su, sv_, wu, wv, cmd, smd, cdv, sdv,
                    Nv, p, outx, outy, outz):
    n = xs.shape[0]
    Nu = n // Nv
    iu_all = np.arange(n) // Nv
    iv_all = np.arange(n) % Nv
    fields = [arr.reshape(Nu, Nv) for arr in (Qx, Qy, Qz, G)]
    outx[:] = 0.0
    outy[:] = 0.0
    outz[:] = 0.0
    for q in range(W.shape[0]):
        qx, qy, qz, gq = (
            _interp_all(F2, iu_all, iv_all, su[q], sv_[q], wu[q], wv[q], Nu, Nv, p)
            for F2 in fields
        )
        x, y, z, nx, ny, nz, ga = _surf_points_all(
            mm, nn, rc, rs, zc, zs_, sign, ct, st, cv, sv,
            cmd[q], smd[q], cdv[q], sdv[q])
        wq = W[q] * gq / np.sqrt((xs - x) ** 2 + (ys - y) ** 2 + (zs - z) ** 2)
        outx += qx * wq
        outy += qy * wq
        outz += qz * wq


# ---------------------------------------------------------------------------
# singularity-subtraction sweeps
# ---------------------------------------------------------------------------

def merkel_sl(xs, ys, zs, gs, sig_s, xt, yt, zt, gt, sig_t,
              E, F, G, su_tab, sv_tab, Nv, out):
    n = xt.shape[0]
    ns = xs.shape[0]
    Nu = ns // Nv
    pts_s = np.stack([xs, ys, zs], axis=1)
    pts_t = np.stack([xt, yt, zt], axis=1)
    iu_all = np.arange(n) // Nv
    iv_all = np.arange(n) % Nv
    wg = sig_s * gs
    for a, b in _blocks(n, ns):
        d = pts_t[a:b, None, :] - pts_s[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", d, d)
        d2[d2 == 0.0] = 1.0
        ju = np.arange(Nu)
        jv = np.arange(Nv)
        du = su_tab[(ju[None, :] - iu_all[a:b, None]) % Nu]  # (B, Nu)
        dv = sv_tab[(jv[None, :] - iv_all[a:b, None]) % Nv]  # (B, Nv)
        R2 = (E[a:b, None, None] * du[:, :, None] ** 2
              + 2 * F[a:b, None, None] * du[:, :, None] * dv[:, None, :]
              + G[a:b, None, None] * dv[:, None, :] ** 2).reshape(b - a, ns)
        R2[R2 == 0.0] = 1.0
        st_i = (sig_t * gt)[a:b, None]
        out[a:b] = (wg[None, :] / np.sqrt(d2) - st_i / np.sqrt(R2)).sum(axis=1)


def merkel_dl_pv(xs, ys, zs, wnx, wny, wnz, sig_s, xt, yt, zt, gt, sig_t,
                 E, F, G, L, M, N, su_tab, sv_tab, Nv, out):
    n = xt.shape[0]
    ns = xs.shape[0]
    Nu = ns // Nv
    pts_s = np.stack([xs, ys, zs], axis=1)
    pts_t = np.stack([xt, yt, zt], axis=1)
    wn = np.stack([wnx, wny, wnz], axis=1)
    iu_all = np.arange(n) // Nv
    iv_all = np.arange(n) % Nv
    for a, b in _blocks(n, ns):
        d = pts_t[a:b, None, :] - pts_s[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", d, d)
        d2[d2 == 0.0] = 1.0
        num = np.einsum("jk,ijk->ij", wn, d) * sig_s[None, :]
        ju = np.arange(Nu)
        jv = np.arange(Nv)
        du = su_tab[(ju[None, :] - iu_all[a:b, None]) % Nu][:, :, None]
        dv = sv_tab[(jv[None, :] - iv_all[a:b, None]) % Nv][:, None, :]
        R2 = (E[a:b, None, None] * du**2 + 2 * F[a:b, None, None] * du * dv
              + G[a:b, None, None] * dv**2).reshape(b - a, ns)
        S = (L[a:b, None, None] * du**2 + 2 * M[a:b, None, None] * du * dv
             + N[a:b, None, None] * dv**2).reshape(b - a, ns)
        R2[R2 == 0.0] = 1.0
        st_i = (sig_t * gt)[a:b, None]
        out[a:b] = (num / (d2 * np.sqrt(d2))
                    - 0.5 * st_i * S / (R2 * np.sqrt(R2))).sum(axis=1)


def merkel_dl_gauss(xs, ys, zs, wnx, wny, wnz, sig, Nv, out):
    n = xs.shape[0]
    pts = np.stack([xs, ys, zs], axis=1)
    wn = np.stack([wnx, wny, wnz], axis=1)
    for a, b in _blocks(n, n):
        d = pts[a:b, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", d, d)
        d2[d2 == 0.0] = 1.0
        num = np.einsum("jk,ijk->ij", wn, d) * (sig[None, :] - sig[a:b, None])
        out[a:b] = (num / (d2 * np.sqrt(d2))).sum(axis=1)
