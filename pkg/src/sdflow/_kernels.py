"""Compiled right-hand side for :class:`~sdflow.flow.RockFluidModel`.

A fused loop version of the array code in :mod:`sdflow.reconstruction` and
:mod:`sdflow.scheme`. The arithmetic mirrors the reference expressions term
by term; tests hold the two to round-off agreement.
"""

from __future__ import annotations

import numpy as np
from numba import njit

KIND_SD2 = 0
KIND_SD1 = 1
KIND_KT = 2


@njit(cache=True, inline="always", error_model="numpy")
def _frac(s, s_rw, s_max, mu_w, mu_o):
    sw = min(max(s, s_rw), 1.0)
    so = min(max(s, 0.0), s_max)
    a = (sw - s_rw) ** 2 / ((1.0 - s_rw) ** 2 * mu_w)
    b = (1.0 - so / s_max) ** 2 / mu_o
    return a / (a + b)


@njit(cache=True, inline="always", error_model="numpy")
def _dfds(s, s_rw, s_max, mu_w, mu_o):
    sw = min(max(s, s_rw), 1.0)
    so = min(max(s, 0.0), s_max)
    cw = 1.0 / ((1.0 - s_rw) ** 2 * mu_w)
    a = (sw - s_rw) ** 2 * cw
    da = 2.0 * (sw - s_rw) * cw
    if s > 1.0:
        da = 0.0
    r = 1.0 - so / s_max
    b = r**2 / mu_o
    db = -2.0 * r / (s_max * mu_o)
    if s < 0.0:
        db = 0.0
    d = a + b
    return (da * b - a * db) / (d * d)


@njit(cache=True, inline="always", error_model="numpy")
def _wsb(sl, sr, p, crit, crit_speed):
    lo = min(sl, sr)
    hi = max(sl, sr)
    out = max(abs(_dfds(lo, p[0], p[1], p[2], p[3])), abs(_dfds(hi, p[0], p[1], p[2], p[3])))
    for i in range(crit.shape[0]):
        if lo <= crit[i] and crit[i] <= hi:
            out = max(out, crit_speed[i])
    return out


@njit(cache=True, inline="always", error_model="numpy")
def _wsb_cells(sl, sr, gl, gr, crit, crit_speed):
    # same value as _wsb given gl = |f'(sl)|, gr = |f'(sr)|
    lo = min(sl, sr)
    hi = max(sl, sr)
    out = max(gl, gr)
    for i in range(crit.shape[0]):
        if lo <= crit[i] and crit[i] <= hi:
            out = max(out, crit_speed[i])
    return out


@njit(cache=True, inline="always", error_model="numpy")
def _prev(i, n):
    return i - 1 if i > 0 else n - 1


@njit(cache=True, inline="always", error_model="numpy")
def _wrap(i, n):
    return i if i < n else i - n


@njit(cache=True, inline="always", error_model="numpy")
def _minmod3(a, b, c):
    lo = min(min(a, b), c)
    hi = max(max(a, b), c)
    if lo > 0.0:
        return lo
    if hi < 0.0:
        return hi
    return 0.0


@njit(cache=True, inline="always", error_model="numpy")
def _clamp_index(i, n, periodic):
    if periodic:
        return i % n
    return min(max(i, 0), n - 1)


@njit(cache=True, error_model="numpy")
def _limit_corners(s, sx, sy, dx, dy, px, py):
    ny, nx = s.shape
    for k in range(ny):
        for j in range(nx):
            c = s[k, j]
            lo = c
            hi = c
            for dk in (-1, 0, 1):
                kk = _clamp_index(k + dk, ny, py)
                for dj in (-1, 0, 1):
                    v = s[kk, _clamp_index(j + dj, nx, px)]
                    lo = min(lo, v)
                    hi = max(hi, v)
            ext = abs(0.5 * dx * sx[k, j]) + abs(0.5 * dy * sy[k, j])
            alpha = 1.0
            if c + ext > hi:
                alpha = (hi - c) / ext
            if c - ext < lo:
                alpha = min(alpha, (c - lo) / ext)
            sx[k, j] *= alpha
            sy[k, j] *= alpha


@njit(cache=True, error_model="numpy")
def convection_rhs(s, vx, vy, vfx, vfy, dx, dy, theta, kind, corner_limit, px, py, p, crit, crit_speed, f_inj, wells, out):
    """Fill ``out`` with ``dS/dt``. ``wells`` is a per-cell rate array (zeros when absent)."""
    ny, nx = s.shape
    s_rw, s_max, mu_w, mu_o = p[0], p[1], p[2], p[3]

    # limited slopes, zero on the boundary unless periodic
    sx = np.zeros((ny, nx))
    sy = np.zeros((ny, nx))
    if kind != KIND_SD1:
        for k in range(ny):
            for j in range(nx):
                if (j == 0 or j == nx - 1) and not px:
                    continue
                c = s[k, j]
                dl = c - s[k, _prev(j, nx)]
                dr = s[k, _wrap(j + 1, nx)] - c
                sx[k, j] = _minmod3(theta * dr / dx, (dl + dr) / (2.0 * dx), theta * dl / dx)
        for k in range(ny):
            if (k == 0 or k == ny - 1) and not py:
                continue
            for j in range(nx):
                c = s[k, j]
                dl = c - s[_prev(k, ny), j]
                dr = s[_wrap(k + 1, ny), j] - c
                sy[k, j] = _minmod3(theta * dr / dy, (dl + dr) / (2.0 * dy), theta * dl / dy)

    if kind == KIND_SD2 and corner_limit:
        _limit_corners(s, sx, sy, dx, dy, px, py)

    east = np.empty((ny, nx))
    west = np.empty((ny, nx))
    north = np.empty((ny, nx))
    south = np.empty((ny, nx))
    f_ll = np.empty((ny, nx))
    f_lr = np.empty((ny, nx))
    f_ul = np.empty((ny, nx))
    f_ur = np.empty((ny, nx))
    for k in range(ny):
        for j in range(nx):
            c = s[k, j]
            hx = 0.5 * dx * sx[k, j]
            hy = 0.5 * dy * sy[k, j]
            east[k, j] = c + hx
            west[k, j] = c - hx
            north[k, j] = c + hy
            south[k, j] = c - hy
            if kind != KIND_KT:
                f_ll[k, j] = _frac(west[k, j] - hy, s_rw, s_max, mu_w, mu_o)
                f_lr[k, j] = _frac(east[k, j] - hy, s_rw, s_max, mu_w, mu_o)
                f_ul[k, j] = _frac(west[k, j] + hy, s_rw, s_max, mu_w, mu_o)
                f_ur[k, j] = _frac(east[k, j] + hy, s_rw, s_max, mu_w, mu_o)

    hxf = np.zeros((ny, nx + 1))
    hyf = np.zeros((ny + 1, nx))
    j_lo = 0 if px else 1
    j_hi = nx + 1 if px else nx
    k_lo = 0 if py else 1
    k_hi = ny + 1 if py else ny

    if kind == KIND_KT:
        for k in range(ny):
            for J in range(j_lo, j_hi):
                L = _prev(J, nx)
                R = _wrap(J, nx)
                um = east[k, L]
                up = west[k, R]
                vn = vfx[k, J]
                a = abs(vn) * _wsb(um, up, p, crit, crit_speed)
                fsum = _frac(up, s_rw, s_max, mu_w, mu_o) + _frac(um, s_rw, s_max, mu_w, mu_o)
                hxf[k, J] = 0.5 * vn * fsum - 0.5 * a * (up - um)
        for K in range(k_lo, k_hi):
            B = _prev(K, ny)
            T = _wrap(K, ny)
            for j in range(nx):
                um = north[B, j]
                up = south[T, j]
                vn = vfy[K, j]
                a = abs(vn) * _wsb(um, up, p, crit, crit_speed)
                fsum = _frac(up, s_rw, s_max, mu_w, mu_o) + _frac(um, s_rw, s_max, mu_w, mu_o)
                hyf[K, j] = 0.5 * vn * fsum - 0.5 * a * (up - um)
    else:
        # face speeds from cell averages and the larger end-vertex velocity;
        # |f'| at the two states is evaluated once per cell
        g = np.empty((ny, nx))
        for k in range(ny):
            for j in range(nx):
                g[k, j] = abs(_dfds(s[k, j], s_rw, s_max, mu_w, mu_o))
        ax = np.zeros((ny, nx + 1))
        for k in range(ny):
            for J in range(j_lo, j_hi):
                u = max(abs(vx[k, J]), abs(vx[k + 1, J]))
                L = _prev(J, nx)
                R = _wrap(J, nx)
                ax[k, J] = _wsb_cells(s[k, L], s[k, R], g[k, L], g[k, R], crit, crit_speed) * u
        ay = np.zeros((ny + 1, nx))
        for K in range(k_lo, k_hi):
            B = _prev(K, ny)
            T = _wrap(K, ny)
            for j in range(nx):
                u = max(abs(vy[K, j]), abs(vy[K, j + 1]))
                ay[K, j] = _wsb_cells(s[B, j], s[T, j], g[B, j], g[T, j], crit, crit_speed) * u
        for k in range(ny):
            for J in range(j_lo, j_hi):
                c = ax[k, J]
                if k > 0 or py:
                    c = max(c, ax[_prev(k, ny), J])
                if k < ny - 1 or py:
                    c = max(c, ax[_wrap(k + 1, ny), J])
                L = _prev(J, nx)
                R = _wrap(J, nx)
                v_up = vx[k + 1, J]
                v_lo = vx[k, J]
                hxf[k, J] = 0.25 * (
                    v_up * (f_ul[k, R] + f_ur[k, L]) + v_lo * (f_ll[k, R] + f_lr[k, L])
                ) - 0.5 * c * (west[k, R] - east[k, L])
        for K in range(k_lo, k_hi):
            B = _prev(K, ny)
            T = _wrap(K, ny)
            for j in range(nx):
                d = ay[K, j]
                if j > 0 or px:
                    d = max(d, ay[K, _prev(j, nx)])
                if j < nx - 1 or px:
                    d = max(d, ay[K, _wrap(j + 1, nx)])
                v_right = vy[K, j + 1]
                v_left = vy[K, j]
                hyf[K, j] = 0.25 * (
                    v_right * (f_lr[T, j] + f_ur[B, j]) + v_left * (f_ll[T, j] + f_ul[B, j])
                ) - 0.5 * d * (south[T, j] - north[B, j])

    # physical boundaries: inflow carries f(s_inj), outflow the adjacent cell's f
    if not px:
        for k in range(ny):
            vl = vfx[k, 0]
            vr = vfx[k, nx]
            hxf[k, 0] = vl * (f_inj if vl > 0.0 else _frac(s[k, 0], s_rw, s_max, mu_w, mu_o))
            hxf[k, nx] = vr * (f_inj if vr < 0.0 else _frac(s[k, nx - 1], s_rw, s_max, mu_w, mu_o))
    if not py:
        for j in range(nx):
            vb = vfy[0, j]
            vt = vfy[ny, j]
            hyf[0, j] = vb * (f_inj if vb > 0.0 else _frac(s[0, j], s_rw, s_max, mu_w, mu_o))
            hyf[ny, j] = vt * (f_inj if vt < 0.0 else _frac(s[ny - 1, j], s_rw, s_max, mu_w, mu_o))

    area = dx * dy
    for k in range(ny):
        for j in range(nx):
            r = -(hxf[k, j + 1] - hxf[k, j]) / dx - (hyf[k + 1, j] - hyf[k, j]) / dy
            q = wells[k, j]
            if q != 0.0:
                r += q * (f_inj if q > 0.0 else _frac(s[k, j], s_rw, s_max, mu_w, mu_o)) / area
            out[k, j] = r
    return out
