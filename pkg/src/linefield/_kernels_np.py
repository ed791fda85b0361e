"""numpy lane of the hot kernels.

Mirrors linefield._kernels (the compiled lane) operation-for-operation so
that integer classifications (escape times, cell hits) agree bit-exactly and
floating summaries agree to rounding noise. Keep the arithmetic order in the
two files in sync when editing either.
"""

from __future__ import annotations

import numpy as np

_BIG = 1e7
_DZ_RENORM = 1e140


def poly_escape(coeffs: np.ndarray, pts: np.ndarray, iter_cap: int, escape_radius: float):
    """Escape times and derivative data for the polynomial iteration.

    Returns (times, zabs2, dzabs2, dzexp): times[i] = first n with
    |z_n| > escape_radius (0 if already outside, -1 if never within cap);
    zabs2/dzabs2/dzexp describe |z|^2 and |dz|^2 * RENORM^(2*exp) at that
    moment for the distance estimate.
    """
    # decomposed re/im arithmetic: every numpy op below is one IEEE-rounded
    # operation, matching the compiled lane (built with contraction off)
    c = np.asarray(coeffs, dtype=complex)
    cr = np.ascontiguousarray(c.real)
    ci = np.ascontiguousarray(c.imag)
    pts = np.asarray(pts, dtype=complex)
    n = pts.shape[0]
    zr = np.ascontiguousarray(pts.real).copy()
    zi = np.ascontiguousarray(pts.imag).copy()
    dzr = np.ones(n, dtype=np.float64)
    dzi = np.zeros(n, dtype=np.float64)
    dzexp = np.zeros(n, dtype=np.int32)
    times = np.full(n, -1, dtype=np.int32)
    zabs2_out = np.zeros(n, dtype=np.float64)
    dzabs2_out = np.zeros(n, dtype=np.float64)

    r2 = escape_radius * escape_radius
    alive = np.ones(n, dtype=bool)
    for step in range(iter_cap + 1):
        zabs2 = zr * zr + zi * zi
        escaped = alive & (zabs2 > r2)
        if escaped.any():
            times[escaped] = step
            zabs2_out[escaped] = zabs2[escaped]
            dzabs2_out[escaped] = (dzr[escaped] * dzr[escaped]
                                   + dzi[escaped] * dzi[escaped])
            alive &= ~escaped
        if step == iter_cap or not alive.any():
            break
        ar = zr[alive]
        ai = zi[alive]
        # fused Horner: v = p(z), w = p'(z)
        vr = np.zeros_like(ar)
        vi = np.zeros_like(ar)
        wr = np.zeros_like(ar)
        wi = np.zeros_like(ar)
        for k in range(len(cr) - 1, -1, -1):
            tr = wr * ar - wi * ai + vr
            ti = wr * ai + wi * ar + vi
            wr = tr
            wi = ti
            tr = vr * ar - vi * ai + cr[k]
            ti = vr * ai + vi * ar + ci[k]
            vr = tr
            vi = ti
        br = dzr[alive]
        bi = dzi[alive]
        tr = br * wr - bi * wi
        ti = br * wi + bi * wr
        big = (tr * tr + ti * ti) > _DZ_RENORM * _DZ_RENORM
        if big.any():
            tr[big] = tr[big] / _DZ_RENORM
            ti[big] = ti[big] / _DZ_RENORM
            idx = np.where(alive)[0][big]
            dzexp[idx] += 1
        zr[alive] = vr
        zi[alive] = vi
        dzr[alive] = tr
        dzi[alive] = ti
    return times, zabs2_out, dzabs2_out, dzexp


def quad_resolvent(c: complex, v: complex, xs: np.ndarray, tol: float,
                   max_depth: int, node_cap: int):
    """Truncated resolvent series for z^2 + c with the pole kernel 1/(y - v).

    Per point: value, absolute-series value, depth used, last absolute layer
    (the tail proxy), and a status code: 0 = absolute-layer stop,
    1 = structural-cancellation stop, 2 = depth or node cap, 3 = a layer hit
    the critical value (branches merge).
    """
    xs = np.asarray(xs, dtype=complex)
    n = xs.shape[0]
    values = np.zeros(n, dtype=complex)
    absvals = np.zeros(n, dtype=np.float64)
    depths = np.zeros(n, dtype=np.int32)
    tails = np.zeros(n, dtype=np.float64)
    status = np.zeros(n, dtype=np.int32)

    for i in range(n):
        x = xs[i]
        psi0 = 1.0 / (x - v)
        value = psi0
        absval = abs(psi0)
        tail = abs(psi0)
        depth_used = 0
        st = 2 if max_depth > 0 else 0
        ys = np.array([x], dtype=complex)
        acc = np.ones(1, dtype=complex)
        nodes = 1
        streak = 0
        for d in range(1, max_depth + 1):
            if nodes + 2 * ys.shape[0] > node_cap:
                st = 2
                break
            s = np.sqrt(ys - c)
            if np.any(np.abs(s) < 5e-8 * (1.0 + np.abs(ys))):
                st = 3
                break
            children = np.concatenate([s, -s])
            acc2 = np.concatenate([acc, acc]) * (2.0 * children)
            psi = 1.0 / (children - v)
            a2 = acc2.real * acc2.real + acc2.imag * acc2.imag
            layer_val = np.sum(psi / (acc2 * acc2))
            layer_abs = float(np.sum(np.abs(psi) / a2))
            value = value + layer_val
            absval += layer_abs
            tail = layer_abs
            depth_used = d
            nodes += children.shape[0]
            if abs(layer_val) <= 1e-13 * (layer_abs + 1e-300):
                streak += 1
            else:
                streak = 0
            if layer_abs <= tol * (1.0 + absval):
                st = 0
                break
            if streak >= 3:
                st = 1
                break
            ys = children
            acc = acc2
        values[i] = value
        absvals[i] = absval
        depths[i] = depth_used
        tails[i] = tail
        status[i] = st
    return values, absvals, depths, tails, status


def _rational_step(num: np.ndarray, den: np.ndarray, z: np.ndarray,
                   inf_value: complex, inf_finite: bool):
    """One forward step with pole/infinity handling; nan marks dead points."""
    # decomposed re/im arithmetic; see poly_escape for why
    zr = z.real
    zi = z.imag
    zabs2 = zr * zr + zi * zi
    out = np.empty_like(z)
    far = zabs2 > _BIG * _BIG
    if inf_finite:
        out[far] = inf_value
    else:
        out[far] = np.nan
    near = ~far
    ar = np.ascontiguousarray(zr[near])
    ai = np.ascontiguousarray(zi[near])
    nr = np.zeros_like(ar)
    ni = np.zeros_like(ar)
    for k in range(len(num) - 1, -1, -1):
        tr = nr * ar - ni * ai + num[k].real
        ti = nr * ai + ni * ar + num[k].imag
        nr = tr
        ni = ti
    dr = np.zeros_like(ar)
    di = np.zeros_like(ar)
    for k in range(len(den) - 1, -1, -1):
        tr = dr * ar - di * ai + den[k].real
        ti = dr * ai + di * ar + den[k].imag
        dr = tr
        di = ti
    # explicit conjugate division: same op order as the compiled lane
    m2 = dr * dr + di * di
    with np.errstate(divide="ignore", invalid="ignore"):
        qr = (nr * dr + ni * di) / m2
        qi = (ni * dr - nr * di) / m2
    res = qr + 1j * qi
    res[(dr == 0) & (di == 0)] = inf_value if inf_finite else np.nan
    out[near] = res
    return out


def orbit_first_entry(num: np.ndarray, den: np.ndarray, pts: np.ndarray,
                      re0: float, im0: float, cell: float, res: int,
                      mask: np.ndarray, depth: int,
                      inf_value: complex, inf_finite: bool):
    """First i in 0..depth with the cell of f^i(p) inside the mask; else -1."""
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    z = np.asarray(pts, dtype=complex).copy()
    n = z.shape[0]
    out = np.full(n, -1, dtype=np.int32)
    alive = np.ones(n, dtype=bool)
    flat = np.asarray(mask, dtype=np.uint8).reshape(-1)
    for i in range(depth + 1):
        finite = alive & np.isfinite(z.real) & np.isfinite(z.imag)
        ix = np.floor((z.real - re0) / cell)
        iy = np.floor((z.imag - im0) / cell)
        inbox = finite & (ix >= 0) & (ix < res) & (iy >= 0) & (iy < res)
        idx = np.zeros(n, dtype=np.int64)
        sel = np.where(inbox)[0]
        idx[sel] = iy[sel].astype(np.int64) * res + ix[sel].astype(np.int64)
        hit = np.zeros(n, dtype=bool)
        hit[sel] = flat[idx[sel]] != 0
        newly = hit & alive
        out[newly] = i
        alive &= ~newly
        alive &= finite
        if i == depth or not alive.any():
            break
        z[alive] = _rational_step(num, den, z[alive], inf_value, inf_finite)
    return out


def orbit_stays(num: np.ndarray, den: np.ndarray, pts: np.ndarray,
                re0: float, im0: float, cell: float, res: int,
                mask: np.ndarray, horizon: int,
                inf_value: complex, inf_finite: bool):
    """1 where every f^i(p), i = 1..horizon, lands in a masked cell."""
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    z = np.asarray(pts, dtype=complex).copy()
    n = z.shape[0]
    ok = np.ones(n, dtype=bool)
    flat = np.asarray(mask, dtype=np.uint8).reshape(-1)
    for _ in range(horizon):
        z[ok] = _rational_step(num, den, z[ok], inf_value, inf_finite)
        finite = np.isfinite(z.real) & np.isfinite(z.imag)
        ix = np.floor((z.real - re0) / cell)
        iy = np.floor((z.imag - im0) / cell)
        inbox = finite & (ix >= 0) & (ix < res) & (iy >= 0) & (iy < res)
        idx = np.zeros(n, dtype=np.int64)
        sel = np.where(inbox & ok)[0]
        idx[sel] = iy[sel].astype(np.int64) * res + ix[sel].astype(np.int64)
        stay = np.zeros(n, dtype=bool)
        stay[sel] = flat[idx[sel]] != 0
        ok &= stay
        if not ok.any():
            break
    return ok.astype(np.uint8)
