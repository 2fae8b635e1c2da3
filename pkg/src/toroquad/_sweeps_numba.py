"""Numba-compiled inner loops for the O(N^2) kernel sweeps.

Targets are grid nodes; target i corresponds to (iu, iv) = divmod(i, Nv).
All sums run in a fixed order (blocked over sources, sequential within a
target) so results are reproducible and independent of the thread count.

The pure-numpy mirror of this module lives in _sweeps_numpy; the active
implementation is chosen by the TOROQUAD_BACKEND environment flag (see
_backend).
"""

import numpy as np
from numba import njit, prange

_BLOCK = 1024


# ---------------------------------------------------------------------------
# smooth (partition-complement) sweeps: sum_j (1 - chi_ij) K(r_i, r_j) w_j
# computed as a plain full sum minus a windowed chi-weighted correction.
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _win_runs(iv, Nv, hw):
    """Start node and wrap split for the contiguous window band around iv."""
    jv0 = iv - hw
    if jv0 < 0:
        jv0 += Nv
    width = 2 * hw + 1
    split = Nv - jv0
    if split > width:
        split = width
    return jv0, width, split


@njit(cache=True, parallel=True, fastmath=True)
def smooth_sl(xs, ys, zs, w, Nv, Ku, Kv, chiwin, win_half, out):
    n = xs.shape[0]
    Nu = n // Nv
    for i in prange(n):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        tot = 0.0
        j0 = 0
        while j0 < n:
            j1 = min(j0 + _BLOCK, n)
            acc = 0.0
            for j in range(j0, j1):
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                acc += w[j] / np.sqrt(d2)
            tot += acc
            j0 = j1
        iu = i // Nv
        iv = i - iu * Nv
        corr = 0.0
        for a in range(-Ku, Ku + 1):
            hw = win_half[a + Ku]
            if hw < 0:
                continue
            ju = iu + a
            if ju < 0:
                ju += Nu
            elif ju >= Nu:
                ju -= Nu
            base = ju * Nv
            brow = chiwin[a + Ku]
            c0 = Kv - hw
            jv0, width, split = _win_runs(iv, Nv, hw)
            acc = 0.0
            for t in range(split):
                j = base + jv0 + t
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                acc += brow[c0 + t] * w[j] / np.sqrt(d2)
            for t in range(split, width):
                j = base + jv0 + t - Nv
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                acc += brow[c0 + t] * w[j] / np.sqrt(d2)
            corr += acc
        out[i] = tot - corr


@njit(cache=True, parallel=True, fastmath=True)
def smooth_dl(xs, ys, zs, wx, wy, wz, Nv, Ku, Kv, chiwin, win_half, out):
    n = xs.shape[0]
    Nu = n // Nv
    for i in prange(n):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        tot = 0.0
        j0 = 0
        while j0 < n:
            j1 = min(j0 + _BLOCK, n)
            acc = 0.0
            for j in range(j0, j1):
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                inv = 1.0 / np.sqrt(d2)
                acc += (wx[j] * dx + wy[j] * dy + wz[j] * dz) * inv * inv * inv
            tot += acc
            j0 = j1
        iu = i // Nv
        iv = i - iu * Nv
        corr = 0.0
        for a in range(-Ku, Ku + 1):
            hw = win_half[a + Ku]
            if hw < 0:
                continue
            ju = iu + a
            if ju < 0:
                ju += Nu
            elif ju >= Nu:
                ju -= Nu
            base = ju * Nv
            brow = chiwin[a + Ku]
            c0 = Kv - hw
            jv0, width, split = _win_runs(iv, Nv, hw)
            acc = 0.0
            for t in range(split):
                j = base + jv0 + t
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                inv = 1.0 / np.sqrt(d2)
                acc += brow[c0 + t] * (wx[j] * dx + wy[j] * dy + wz[j] * dz) * inv * inv * inv
            for t in range(split, width):
                j = base + jv0 + t - Nv
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                inv = 1.0 / np.sqrt(d2)
                acc += brow[c0 + t] * (wx[j] * dx + wy[j] * dy + wz[j] * dz) * inv * inv * inv
            corr += acc
        out[i] = tot - corr


@njit(cache=True, parallel=True, fastmath=True)
def smooth_casing(xs, ys, zs, wx, wy, wz, tnx, tny, tnz, Nv, Ku, Kv, chiwin,
                  win_half, out):
    n = xs.shape[0]
    Nu = n // Nv
    for i in prange(n):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        nx = tnx[i]
        ny = tny[i]
        nz = tnz[i]
        tot = 0.0
        j0 = 0
        while j0 < n:
            j1 = min(j0 + _BLOCK, n)
            acc = 0.0
            for j in range(j0, j1):
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                inv = 1.0 / np.sqrt(d2)
                num = (nx * (wy[j] * dz - wz[j] * dy)
                       + ny * (wz[j] * dx - wx[j] * dz)
                       + nz * (wx[j] * dy - wy[j] * dx))
                acc += num * inv * inv * inv
            tot += acc
            j0 = j1
        iu = i // Nv
        iv = i - iu * Nv
        corr = 0.0
        for a in range(-Ku, Ku + 1):
            hw = win_half[a + Ku]
            if hw < 0:
                continue
            ju = iu + a
            if ju < 0:
                ju += Nu
            elif ju >= Nu:
                ju -= Nu
            base = ju * Nv
            brow = chiwin[a + Ku]
            c0 = Kv - hw
            jv0, width, split = _win_runs(iv, Nv, hw)
            acc = 0.0
            for t in range(width):
                j = base + jv0 + t
                if t >= split:
                    j -= Nv
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                inv = 1.0 / np.sqrt(d2)
                num = (nx * (wy[j] * dz - wz[j] * dy)
                       + ny * (wz[j] * dx - wx[j] * dz)
                       + nz * (wx[j] * dy - wy[j] * dx))
                acc += brow[c0 + t] * num * inv * inv * inv
            corr += acc
        out[i] = tot - corr


@njit(cache=True, parallel=True, fastmath=True)
def smooth_vecpot(xs, ys, zs, wx, wy, wz, Nv, Ku, Kv, chiwin, win_half,
                  outx, outy, outz):
    n = xs.shape[0]
    Nu = n // Nv
    for i in prange(n):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        tx = 0.0
        ty = 0.0
        tz = 0.0
        j0 = 0
        while j0 < n:
            j1 = min(j0 + _BLOCK, n)
            ax = 0.0
            ay = 0.0
            az = 0.0
            for j in range(j0, j1):
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                inv = 1.0 / np.sqrt(d2)
                ax += wx[j] * inv
                ay += wy[j] * inv
                az += wz[j] * inv
            tx += ax
            ty += ay
            tz += az
            j0 = j1
        iu = i // Nv
        iv = i - iu * Nv
        for a in range(-Ku, Ku + 1):
            hw = win_half[a + Ku]
            if hw < 0:
                continue
            ju = iu + a
            if ju < 0:
                ju += Nu
            elif ju >= Nu:
                ju -= Nu
            base = ju * Nv
            brow = chiwin[a + Ku]
            c0 = Kv - hw
            jv0, width, split = _win_runs(iv, Nv, hw)
            for t in range(width):
                j = base + jv0 + t
                if t >= split:
                    j -= Nv
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                inv = brow[c0 + t] / np.sqrt(d2)
                tx -= wx[j] * inv
                ty -= wy[j] * inv
                tz -= wz[j] * inv
        outx[i] = tx
        outy[i] = ty
        outz[i] = tz


# ---------------------------------------------------------------------------
# singular (compact-support) polar sweeps
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _interp2(F1, F2, iu0, iv0, wu, wv, Nu, Nv, p):
    """Lagrange interpolation of two flat fields sharing one stencil walk.

    The periodic stencil is split at the wrap point into contiguous runs so
    the inner loops stay branch-free.
    """
    if iu0 >= Nu:
        iu0 -= Nu
    if iv0 >= Nv:
        iv0 -= Nv
    su = Nu - iu0
    if su > p:
        su = p
    sv = Nv - iv0
    if sv > p:
        sv = p
    acc1 = 0.0
    acc2 = 0.0
    for a in range(p):
        ia = iu0 + a
        if a >= su:
            ia -= Nu
        base = ia * Nv + iv0
        r1 = 0.0
        r2 = 0.0
        for b in range(sv):
            w = wv[b]
            r1 += w * F1[base + b]
            r2 += w * F2[base + b]
        base -= Nv
        for b in range(sv, p):
            w = wv[b]
            r1 += w * F1[base + b]
            r2 += w * F2[base + b]
        acc1 += wu[a] * r1
        acc2 += wu[a] * r2
    return acc1, acc2


@njit(cache=True, inline="always")
def _interp4(F1, F2, F3, F4, iu0, iv0, wu, wv, Nu, Nv, p):
    """Lagrange interpolation of four flat fields sharing one stencil walk."""
    if iu0 >= Nu:
        iu0 -= Nu
    if iv0 >= Nv:
        iv0 -= Nv
    su = Nu - iu0
    if su > p:
        su = p
    sv = Nv - iv0
    if sv > p:
        sv = p
    acc1 = 0.0
    acc2 = 0.0
    acc3 = 0.0
    acc4 = 0.0
    for a in range(p):
        ia = iu0 + a
        if a >= su:
            ia -= Nu
        base = ia * Nv + iv0
        r1 = 0.0
        r2 = 0.0
        r3 = 0.0
        r4 = 0.0
        for b in range(sv):
            w = wv[b]
            r1 += w * F1[base + b]
            r2 += w * F2[base + b]
            r3 += w * F3[base + b]
            r4 += w * F4[base + b]
        base -= Nv
        for b in range(sv, p):
            w = wv[b]
            r1 += w * F1[base + b]
            r2 += w * F2[base + b]
            r3 += w * F3[base + b]
            r4 += w * F4[base + b]
        acc1 += wu[a] * r1
        acc2 += wu[a] * r2
        acc3 += wu[a] * r3
        acc4 += wu[a] * r4
    return acc1, acc2, acc3, acc4


@njit(cache=True, inline="always")
def _surf_point(mm, nn, rc, rs, zc, zs, ct, st, cmd, smd, cv, sv, cdv, sdv, sign):
    """Surface position, scaled normal, and area element at a polar node.

    Mode trig at the shifted point comes from angle addition of per-target
    tables (ct, st) with per-node tables (cmd, smd); no trig calls here.
    """
    R = 0.0
    Z = 0.0
    Ru = 0.0
    Rv = 0.0
    Zu = 0.0
    Zv = 0.0
    for k in range(mm.shape[0]):
        c = ct[k] * cmd[k] - st[k] * smd[k]
        s = st[k] * cmd[k] + ct[k] * smd[k]
        R += rc[k] * c + rs[k] * s
        Z += zc[k] * c + zs[k] * s
        Ru += mm[k] * (rs[k] * c - rc[k] * s)
        Rv += nn[k] * (rc[k] * s - rs[k] * c)
        Zu += mm[k] * (zs[k] * c - zc[k] * s)
        Zv += nn[k] * (zc[k] * s - zs[k] * c)
    cvp = cv * cdv - sv * sdv
    svp = sv * cdv + cv * sdv
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


@njit(cache=True, parallel=True, fastmath=True)
def singular_sl(xs, ys, zs, F, G, ct, st, cv, sv,
                mm, nn, rc, rs, zc, zs_, sign,
                W, su, sv_, wu, wv, cmd, smd, cdv, sdv,
                Nv, p, out):
    n = xs.shape[0]
    Nu = n // Nv
    nq = W.shape[0]
    for i in prange(n):
        iu = i // Nv
        iv = i - iu * Nv
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        acc = 0.0
        for q in range(nq):
            sig, gq = _interp2(F, G, iu + su[q], iv + sv_[q], wu[q], wv[q],
                               Nu, Nv, p)
            x, y, z, nx, ny, nz, ga = _surf_point(
                mm, nn, rc, rs, zc, zs_, ct[i], st[i], cmd[q], smd[q],
                cv[i], sv[i], cdv[q], sdv[q], sign)
            dx = xi - x
            dy = yi - y
            dz = zi - z
            dist = np.sqrt(dx * dx + dy * dy + dz * dz)
            acc += W[q] * sig * gq / dist
        out[i] = acc


@njit(cache=True, parallel=True, fastmath=True)
def singular_dl(xs, ys, zs, F, G, ct, st, cv, sv,
                mm, nn, rc, rs, zc, zs_, sign,
                W, su, sv_, wu, wv, cmd, smd, cdv, sdv,
                Nv, p, out):
    n = xs.shape[0]
    Nu = n // Nv
    nq = W.shape[0]
    for i in prange(n):
        iu = i // Nv
        iv = i - iu * Nv
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        acc = 0.0
        for q in range(nq):
            sig, gq = _interp2(F, G, iu + su[q], iv + sv_[q], wu[q], wv[q],
                               Nu, Nv, p)
            x, y, z, nx, ny, nz, ga = _surf_point(
                mm, nn, rc, rs, zc, zs_, ct[i], st[i], cmd[q], smd[q],
                cv[i], sv[i], cdv[q], sdv[q], sign)
            dx = xi - x
            dy = yi - y
            dz = zi - z
            d2 = dx * dx + dy * dy + dz * dz
            inv = 1.0 / np.sqrt(d2)
            ndotd = (nx * dx + ny * dy + nz * dz) / ga
            acc += W[q] * sig * gq * ndotd * inv * inv * inv
        out[i] = acc


@njit(cache=True, parallel=True, fastmath=True)
def singular_casing(xs, ys, zs, Qx, Qy, Qz, G, tnx, tny, tnz, ct, st, cv, sv,
                    mm, nn, rc, rs, zc, zs_, sign,
                    W, su, sv_, wu, wv, cmd, smd, cdv, sdv,
                    Nv, p, out):
    n = xs.shape[0]
    Nu = n // Nv
    nq = W.shape[0]
    for i in prange(n):
        iu = i // Nv
        iv = i - iu * Nv
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        nxi = tnx[i]
        nyi = tny[i]
        nzi = tnz[i]
        acc = 0.0
        for q in range(nq):
            qx, qy, qz, gq = _interp4(Qx, Qy, Qz, G, iu + su[q], iv + sv_[q],
                                      wu[q], wv[q], Nu, Nv, p)
            x, y, z, nx, ny, nz, ga = _surf_point(
                mm, nn, rc, rs, zc, zs_, ct[i], st[i], cmd[q], smd[q],
                cv[i], sv[i], cdv[q], sdv[q], sign)
            dx = xi - x
            dy = yi - y
            dz = zi - z
            d2 = dx * dx + dy * dy + dz * dz
            inv = 1.0 / np.sqrt(d2)
            cxx = qy * dz - qz * dy
            cyy = qz * dx - qx * dz
            czz = qx * dy - qy * dx
            acc += W[q] * gq * (nxi * cxx + nyi * cyy + nzi * czz) * inv * inv * inv
        out[i] = acc


@njit(cache=True, parallel=True, fastmath=True)
def singular_vecpot(xs, ys, zs, Qx, Qy, Qz, G, ct, st, cv, sv,
                    mm, nn, rc, rs, zc, zs_, sign,
                    W, su, sv_, wu, wv, cmd, smd, cdv, sdv,
                    Nv, p, outx, outy, outz):
    n = xs.shape[0]
    Nu = n // Nv
    nq = W.shape[0]
    for i in prange(n):
        iu = i // Nv
        iv = i - iu * Nv
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        ax = 0.0
        ay = 0.0
        az = 0.0
        for q in range(nq):
            qx, qy, qz, gq = _interp4(Qx, Qy, Qz, G, iu + su[q], iv + sv_[q],
                                      wu[q], wv[q], Nu, Nv, p)
            x, y, z, nx, ny, nz, ga = _surf_point(
                mm, nn, rc, rs, zc, zs_, ct[i], st[i], cmd[q], smd[q],
                cv[i], sv[i], cdv[q], sdv[q], sign)
            dx = xi - x
            dy = yi - y
            dz = zi - z
            wq = W[q] * gq / np.sqrt(dx * dx + dy * dy + dz * dz)
            ax += qx * wq
            ay += qy * wq
            az += qz * wq
        outx[i] = ax
        outy[i] = ay
        outz[i] = az


# ---------------------------------------------------------------------------
# singularity-subtraction sweeps (low-order baseline)
# ---------------------------------------------------------------------------

@njit(cache=True, parallel=True, fastmath=True)
def merkel_sl(xs, ys, zs, gs, sig_s, xt, yt, zt, gt, sig_t,
              E, F, G, su_tab, sv_tab, Nv, out):
    """sum_j [ sig' g' / |r - r'| - sig_t g_t / R(s, t) ] in a fixed order.

    Source nodes may be staggered; su_tab/sv_tab give the wrapped parameter
    offsets as a function of the index difference.  The coincident node of
    the non-staggered variant cancels exactly between the two guarded terms.
    """
    n = xt.shape[0]
    ns = xs.shape[0]
    Nu = ns // Nv
    for i in prange(n):
        xi = xt[i]
        yi = yt[i]
        zi = zt[i]
        st_i = sig_t[i] * gt[i]
        Ei = E[i]
        Fi = F[i]
        Gi = G[i]
        iu = i // Nv
        iv = i - iu * Nv
        tot = 0.0
        for ju in range(Nu):
            du = su_tab[(ju - iu) % Nu]
            base = ju * Nv
            acc = 0.0
            for jv in range(Nv):
                dv = sv_tab[(jv - iv) % Nv]
                j = base + jv
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                R2 = Ei * du * du + 2.0 * Fi * du * dv + Gi * dv * dv
                R2 += R2 == 0.0
                acc += sig_s[j] * gs[j] / np.sqrt(d2) - st_i / np.sqrt(R2)
            tot += acc
        out[i] = tot


@njit(cache=True, parallel=True, fastmath=True)
def merkel_dl_pv(xs, ys, zs, wnx, wny, wnz, sig_s, xt, yt, zt, gt, sig_t,
                 E, F, G, L, M, N, su_tab, sv_tab, Nv, out):
    """Kernel-subtracted principal-value double layer.

    Per pair: sig' (n' g') . d / |d|^3  -  sig_t g_t S(s,t) / (2 R(s,t)^3)
    with S the second-fundamental-form quadratic at the target.
    """
    n = xt.shape[0]
    ns = xs.shape[0]
    Nu = ns // Nv
    for i in prange(n):
        xi = xt[i]
        yi = yt[i]
        zi = zt[i]
        st_i = sig_t[i] * gt[i]
        Ei = E[i]
        Fi = F[i]
        Gi = G[i]
        Li = L[i]
        Mi = M[i]
        Ni = N[i]
        iu = i // Nv
        iv = i - iu * Nv
        tot = 0.0
        for ju in range(Nu):
            du = su_tab[(ju - iu) % Nu]
            base = ju * Nv
            acc = 0.0
            for jv in range(Nv):
                dv = sv_tab[(jv - iv) % Nv]
                j = base + jv
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                inv = 1.0 / np.sqrt(d2)
                R2 = Ei * du * du + 2.0 * Fi * du * dv + Gi * dv * dv
                R2 += R2 == 0.0
                invR = 1.0 / np.sqrt(R2)
                S = Li * du * du + 2.0 * Mi * du * dv + Ni * dv * dv
                acc += (sig_s[j] * (wnx[j] * dx + wny[j] * dy + wnz[j] * dz)
                        * inv * inv * inv
                        - 0.5 * st_i * S * invR * invR * invR)
            tot += acc
        out[i] = tot


@njit(cache=True, parallel=True, fastmath=True)
def merkel_dl_gauss(xs, ys, zs, wnx, wny, wnz, sig, Nv, out):
    """Density-regularized double layer: sum_j (n' g') . d / |d|^3 (sig' - sig_i)."""
    n = xs.shape[0]
    for i in prange(n):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        si = sig[i]
        tot = 0.0
        j0 = 0
        while j0 < n:
            j1 = min(j0 + _BLOCK, n)
            acc = 0.0
            for j in range(j0, j1):
                dx = xi - xs[j]
                dy = yi - ys[j]
                dz = zi - zs[j]
                d2 = dx * dx + dy * dy + dz * dz
                d2 += d2 == 0.0
                inv = 1.0 / np.sqrt(d2)
                acc += ((wnx[j] * dx + wny[j] * dy + wnz[j] * dz)
                        * (sig[j] - si) * inv * inv * inv)
            tot += acc
            j0 = j1
        out[i] = tot
