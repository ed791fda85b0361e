# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled lane of the hot kernels.

Mirrors _kernels_np operation-for-operation (same formulas, same order, no
fp contraction) so cell classifications agree bit-exactly between lanes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, isfinite, sqrt

cnp.import_array()

cdef double BIG = 1e7
cdef double DZ_RENORM = 1e140


def poly_escape(coeffs, pts, int iter_cap, double escape_radius):
    cdef cnp.complex128_t[::1] c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef cnp.complex128_t[::1] p = np.ascontiguousarray(pts, dtype=np.complex128)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t m = c.shape[0]

    times_arr = np.full(n, -1, dtype=np.int32)
    zabs2_arr = np.zeros(n, dtype=np.float64)
    dzabs2_arr = np.zeros(n, dtype=np.float64)
    dzexp_arr = np.zeros(n, dtype=np.int32)
    cdef int[::1] times = times_arr
    cdef double[::1] zabs2_out = zabs2_arr
    cdef double[::1] dzabs2_out = dzabs2_arr
    cdef int[::1] dzexp = dzexp_arr

    cdef double r2 = escape_radius * escape_radius
    cdef Py_ssize_t j, k
    cdef int step, expo
    cdef double zr, zi, dzr, dzi, vr, vi, wr, wi, tr, ti, za2, dza2

    for j in range(n):
        zr = p[j].real
        zi = p[j].imag
        dzr = 1.0
        dzi = 0.0
        expo = 0
        for step in range(iter_cap + 1):
            za2 = zr * zr + zi * zi
            if za2 > r2:
                times[j] = step
                zabs2_out[j] = za2
                dzabs2_out[j] = dzr * dzr + dzi * dzi
                dzexp[j] = expo
                break
            if step == iter_cap:
                break
            vr = 0.0
            vi = 0.0
            wr = 0.0
            wi = 0.0
            for k in range(m - 1, -1, -1):
                tr = wr * zr - wi * zi + vr
                ti = wr * zi + wi * zr + vi
                wr = tr
                wi = ti
                tr = vr * zr - vi * zi + c[k].real
                ti = vr * zi + vi * zr + c[k].imag
                vr = tr
                vi = ti
            tr = dzr * wr - dzi * wi
            ti = dzr * wi + dzi * wr
            dzr = tr
            dzi = ti
            dza2 = dzr * dzr + dzi * dzi
            if dza2 > DZ_RENORM * DZ_RENORM:
                dzr = dzr / DZ_RENORM
                dzi = dzi / DZ_RENORM
                expo = expo + 1
            zr = vr
            zi = vi
    return times_arr, zabs2_arr, dzabs2_arr, dzexp_arr


cdef inline void _csqrt(double re, double im, double* outr, double* outi) noexcept:
    cdef double m = sqrt(re * re + im * im)
    cdef double t
    if m == 0.0:
        outr[0] = 0.0
        outi[0] = 0.0
        return
    t = sqrt(0.5 * (m + fabs(re)))
    if re >= 0.0:
        outr[0] = t
        outi[0] = im / (2.0 * t)
    else:
        if im >= 0.0:
            outi[0] = t
        else:
            outi[0] = -t
        outr[0] = im / (2.0 * outi[0])


def quad_resolvent(double complex c, double complex v, xs, double tol,
                   int max_depth, long node_cap):
    cdef cnp.complex128_t[::1] x_arr = np.ascontiguousarray(xs, dtype=np.complex128)
    cdef Py_ssize_t n = x_arr.shape[0]

    values_arr = np.zeros(n, dtype=np.complex128)
    absvals_arr = np.zeros(n, dtype=np.float64)
    depths_arr = np.zeros(n, dtype=np.int32)
    tails_arr = np.zeros(n, dtype=np.float64)
    status_arr = np.zeros(n, dtype=np.int32)
    cdef cnp.complex128_t[::1] values = values_arr
    cdef double[::1] absvals = absvals_arr
    cdef int[::1] depths = depths_arr
    cdef double[::1] tails = tails_arr
    cdef int[::1] status = status_arr

    cdef long pcap = 2048
    cdef long ccap = 4096
    cdef double[::1] yr = np.empty(pcap, dtype=np.float64)
    cdef double[::1] yi = np.empty(pcap, dtype=np.float64)
    cdef double[::1] ar = np.empty(pcap, dtype=np.float64)
    cdef double[::1] ai = np.empty(pcap, dtype=np.float64)
    cdef double[::1] cyr = np.empty(ccap, dtype=np.float64)
    cdef double[::1] cyi = np.empty(ccap, dtype=np.float64)
    cdef double[::1] car = np.empty(ccap, dtype=np.float64)
    cdef double[::1] cai = np.empty(ccap, dtype=np.float64)

    cdef double cr = c.real, ci = c.imag, vr_pole = v.real, vi_pole = v.imag
    cdef Py_ssize_t i, j, widx
    cdef int d, st, depth_used, streak
    cdef long nodes, width
    cdef double xr, xi, val_r, val_i, absval, tail
    cdef double sr, si, pr, pi, m2, psir, psii, a2
    cdef double lay_r, lay_i, lay_abs
    cdef double c2r, c2i, tr, ti, q2r, q2i

    for i in range(n):
        xr = x_arr[i].real
        xi = x_arr[i].imag
        # psi0 = 1 / (x - v)
        pr = xr - vr_pole
        pi = xi - vi_pole
        m2 = pr * pr + pi * pi
        val_r = pr / m2
        val_i = -pi / m2
        absval = sqrt(val_r * val_r + val_i * val_i)
        tail = absval
        depth_used = 0
        st = 2 if max_depth > 0 else 0
        yr[0] = xr
        yi[0] = xi
        ar[0] = 1.0
        ai[0] = 0.0
        width = 1
        nodes = 1
        streak = 0
        for d in range(1, max_depth + 1):
            if nodes + 2 * width > node_cap:
                st = 2
                break
            if 2 * width > ccap:
                while ccap < 2 * width:
                    ccap = 2 * ccap
                cyr = np.empty(ccap, dtype=np.float64)
                cyi = np.empty(ccap, dtype=np.float64)
                car = np.empty(ccap, dtype=np.float64)
                cai = np.empty(ccap, dtype=np.float64)
            lay_r = 0.0
            lay_i = 0.0
            lay_abs = 0.0
            # near-critical pre-scan: sqrt(y - c) magnitude
            for j in range(width):
                pr = yr[j] - cr
                pi = yi[j] - ci
                m2 = sqrt(sqrt(pr * pr + pi * pi))
                if m2 < 5e-8 * (1.0 + sqrt(yr[j] * yr[j] + yi[j] * yi[j])):
                    st = 3
                    break
            else:
                for j in range(width):
                    _csqrt(yr[j] - cr, yi[j] - ci, &sr, &si)
                    widx = 2 * j
                    # child +s and -s with acc_child = acc_parent * 2*child
                    cyr[widx] = sr
                    cyi[widx] = si
                    tr = ar[j] * (2.0 * sr) - ai[j] * (2.0 * si)
                    ti = ar[j] * (2.0 * si) + ai[j] * (2.0 * sr)
                    car[widx] = tr
                    cai[widx] = ti
                    cyr[widx + 1] = -sr
                    cyi[widx + 1] = -si
                    car[widx + 1] = -tr
                    cai[widx + 1] = -ti
                for j in range(2 * width):
                    # psi = 1/(child - v)
                    pr = cyr[j] - vr_pole
                    pi = cyi[j] - vi_pole
                    m2 = pr * pr + pi * pi
                    psir = pr / m2
                    psii = -pi / m2
                    # acc^2
                    c2r = car[j] * car[j] - cai[j] * cai[j]
                    c2i = 2.0 * car[j] * cai[j]
                    a2 = c2r * c2r + c2i * c2i
                    # psi / acc^2
                    q2r = (psir * c2r + psii * c2i) / a2
                    q2i = (psii * c2r - psir * c2i) / a2
                    lay_r += q2r
                    lay_i += q2i
                    lay_abs += sqrt(psir * psir + psii * psii) / sqrt(a2)
                val_r += lay_r
                val_i += lay_i
                absval += lay_abs
                tail = lay_abs
                depth_used = d
                nodes += 2 * width
                if sqrt(lay_r * lay_r + lay_i * lay_i) <= 1e-13 * (lay_abs + 1e-300):
                    streak += 1
                else:
                    streak = 0
                if lay_abs <= tol * (1.0 + absval):
                    st = 0
                    break
                if streak >= 3:
                    st = 1
                    break
                width = 2 * width
                if width > pcap:
                    while pcap < width:
                        pcap = 2 * pcap
                    yr = np.empty(pcap, dtype=np.float64)
                    yi = np.empty(pcap, dtype=np.float64)
                    ar = np.empty(pcap, dtype=np.float64)
                    ai = np.empty(pcap, dtype=np.float64)
                for j in range(width):
                    yr[j] = cyr[j]
                    yi[j] = cyi[j]
                    ar[j] = car[j]
                    ai[j] = cai[j]
                continue
            break  # inner for-else fell through via st=3
        values[i] = val_r + 1j * val_i
        absvals[i] = absval
        depths[i] = depth_used
        tails[i] = tail
        status[i] = st
    return values_arr, absvals_arr, depths_arr, tails_arr, status_arr


cdef inline bint _step(double* zr, double* zi,
                       cnp.complex128_t[::1] num, cnp.complex128_t[::1] den,
                       double inf_r, double inf_i, bint inf_finite) noexcept:
    """Advance z by one application of num/den; returns 0 when the point dies."""
    cdef double r = zr[0], s = zi[0]
    cdef double nr, ni, dr, di, tr, ti, m2
    cdef Py_ssize_t k
    if r * r + s * s > BIG * BIG:
        if inf_finite:
            zr[0] = inf_r
            zi[0] = inf_i
            return 1
        return 0
    nr = 0.0
    ni = 0.0
    for k in range(num.shape[0] - 1, -1, -1):
        tr = nr * r - ni * s + num[k].real
        ti = nr * s + ni * r + num[k].imag
        nr = tr
        ni = ti
    dr = 0.0
    di = 0.0
    for k in range(den.shape[0] - 1, -1, -1):
        tr = dr * r - di * s + den[k].real
        ti = dr * s + di * r + den[k].imag
        dr = tr
        di = ti
    if dr == 0.0 and di == 0.0:
        if inf_finite:
            zr[0] = inf_r
            zi[0] = inf_i
            return 1
        return 0
    m2 = dr * dr + di * di
    zr[0] = (nr * dr + ni * di) / m2
    zi[0] = (ni * dr - nr * di) / m2
    return 1


def orbit_first_entry(num, den, pts, double re0, double im0, double cell,
                      int res, mask, int depth,
                      double complex inf_value, bint inf_finite):
    cdef cnp.complex128_t[::1] nc = np.ascontiguousarray(num, dtype=np.complex128)
    cdef cnp.complex128_t[::1] dc = np.ascontiguousarray(den, dtype=np.complex128)
    cdef cnp.complex128_t[::1] p = np.ascontiguousarray(pts, dtype=np.complex128)
    cdef cnp.uint8_t[::1] mk = np.ascontiguousarray(mask, dtype=np.uint8).reshape(-1)
    cdef Py_ssize_t n = p.shape[0]
    out_arr = np.full(n, -1, dtype=np.int32)
    cdef int[::1] out = out_arr
    cdef Py_ssize_t j
    cdef int i
    cdef double zr, zi, fx, fy
    cdef double inf_r = inf_value.real, inf_i = inf_value.imag

    for j in range(n):
        zr = p[j].real
        zi = p[j].imag
        for i in range(depth + 1):
            if not (isfinite(zr) and isfinite(zi)):
                break
            fx = floor((zr - re0) / cell)
            fy = floor((zi - im0) / cell)
            if 0 <= fx < res and 0 <= fy < res:
                if mk[(<Py_ssize_t>fy) * res + (<Py_ssize_t>fx)] != 0:
                    out[j] = i
                    break
            if i == depth:
                break
            if not _step(&zr, &zi, nc, dc, inf_r, inf_i, inf_finite):
                break
    return out_arr


def orbit_stays(num, den, pts, double re0, double im0, double cell,
                int res, mask, int horizon,
                double complex inf_value, bint inf_finite):
    cdef cnp.complex128_t[::1] nc = np.ascontiguousarray(num, dtype=np.complex128)
    cdef cnp.complex128_t[::1] dc = np.ascontiguousarray(den, dtype=np.complex128)
    cdef cnp.complex128_t[::1] p = np.ascontiguousarray(pts, dtype=np.complex128)
    cdef cnp.uint8_t[::1] mk = np.ascontiguousarray(mask, dtype=np.uint8).reshape(-1)
    cdef Py_ssize_t n = p.shape[0]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] out = out_arr
    cdef Py_ssize_t j
    cdef int i
    cdef double zr, zi, fx, fy
    cdef double inf_r = inf_value.real, inf_i = inf_value.imag
    cdef bint ok

    for j in range(n):
        zr = p[j].real
        zi = p[j].imag
        ok = 1
        for i in range(horizon):
            if not _step(&zr, &zi, nc, dc, inf_r, inf_i, inf_finite):
                ok = 0
                break
            if not (isfinite(zr) and isfinite(zi)):
                ok = 0
                break
            fx = floor((zr - re0) / cell)
            fy = floor((zi - im0) / cell)
            if 0 <= fx < res and 0 <= fy < res:
                if mk[(<Py_ssize_t>fy) * res + (<Py_ssize_t>fx)] == 0:
                    ok = 0
                    break
            else:
                ok = 0
                break
        out[j] = ok
    return out_arr
