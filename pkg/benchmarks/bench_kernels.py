"""Time the compiled kernel lane against the numpy lane.

Runs each hot kernel on a representative workload, reports the median of
repeated runs, and checks that the two lanes agree on the outputs that are
supposed to be bit-identical (integer classifications) or rounding-close
(floating summaries).

Usage: python3 benchmarks/bench_kernels.py [--repeats N] [--scale S]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from linefield import _kernels_np

try:
    from linefield import _kernels as _compiled
except ImportError:
    _compiled = None

from linefield.grid import Grid, julia_cells
from linefield.ratmap import RationalMap


def _timed(fn, repeats):
    best = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best.append(time.perf_counter() - t0)
    return float(np.median(best)), out


def _report(name, n, t_np, t_cy, agree):
    if t_cy is None:
        print(f"{name:20s} n={n:<8d} numpy {1e3 * t_np:9.2f} ms   cython --")
        return
    speed = t_np / t_cy if t_cy > 0 else float("inf")
    print(f"{name:20s} n={n:<8d} numpy {1e3 * t_np:9.2f} ms   "
          f"cython {1e3 * t_cy:9.2f} ms   x{speed:5.1f}   {agree}")


def bench_poly_escape(repeats, scale):
    res = int(384 * scale)
    grid = Grid.square(0j, 1.8, res)
    pts = grid.centers()
    coeffs = np.array([-1.0 + 0j, 0.0, 1.0])

    t_np, out_np = _timed(
        lambda: _kernels_np.poly_escape(coeffs, pts, 256, 1e3), repeats)
    t_cy, agree = None, ""
    if _compiled is not None:
        t_cy, out_cy = _timed(
            lambda: _compiled.poly_escape(coeffs, pts, 256, 1e3), repeats)
        same_times = np.array_equal(np.asarray(out_np[0]), np.asarray(out_cy[0]))
        esc = np.asarray(out_np[0]) >= 0
        dz = np.abs(np.asarray(out_np[1])[esc] - np.asarray(out_cy[1])[esc])
        rel = dz / (1.0 + np.abs(np.asarray(out_np[1])[esc]))
        agree = (f"times {'match' if same_times else 'DIFFER'}, "
                 f"|z|^2 rel {rel.max():.1e}")
    _report("poly_escape", pts.shape[0], t_np, t_cy, agree)


def bench_quad_resolvent(repeats, scale):
    n = int(120 * scale)
    rng = np.random.default_rng(5)
    ang = rng.uniform(0.0, 2 * np.pi, n)
    xs = (2.0 + 0.25 * rng.uniform(0.4, 1.0, n)) * np.exp(1j * ang)

    def run(mod):
        return mod.quad_resolvent(-2.0 + 0j, -2.0 + 0j, xs, 1e-6, 14, 1 << 15)

    t_np, out_np = _timed(lambda: run(_kernels_np), repeats)
    t_cy, agree = None, ""
    if _compiled is not None:
        t_cy, out_cy = _timed(lambda: run(_compiled), repeats)
        same_status = np.array_equal(np.asarray(out_np[4]), np.asarray(out_cy[4]))
        dv = np.abs(np.asarray(out_np[0]) - np.asarray(out_cy[0]))
        rel = dv / (1.0 + np.abs(np.asarray(out_np[0])))
        agree = (f"status {'match' if same_status else 'DIFFER'}, "
                 f"value rel {rel.max():.1e}")
    _report("quad_resolvent", n, t_np, t_cy, agree)


def _orbit_setup(scale):
    f = RationalMap([-1.0 + 0j, 0.0, 1.0], [1.0 + 0j])
    grid = Grid.square(0j, 1.8, 256)
    julia = julia_cells(f, grid)
    mask = julia.mask.astype(np.uint8)
    n = int(150_000 * scale)
    rng = np.random.default_rng(11)
    pts = rng.uniform(-1.8, 1.8, n) + 1j * rng.uniform(-1.8, 1.8, n)
    num = np.asarray(f.num.coeffs, dtype=complex)
    den = np.asarray(f.den.coeffs, dtype=complex)
    args = (num, den, pts, grid.lo.real, grid.lo.imag, grid.cell,
            grid.resolution, mask)
    return args


def bench_orbit_first_entry(repeats, scale):
    args = _orbit_setup(scale)
    t_np, out_np = _timed(
        lambda: _kernels_np.orbit_first_entry(*args, 8, 0j, False), repeats)
    t_cy, agree = None, ""
    if _compiled is not None:
        t_cy, out_cy = _timed(
            lambda: _compiled.orbit_first_entry(*args, 8, 0j, False), repeats)
        same = np.array_equal(np.asarray(out_np), np.asarray(out_cy))
        agree = "entries match" if same else "entries DIFFER"
    _report("orbit_first_entry", args[2].shape[0], t_np, t_cy, agree)


def bench_orbit_stays(repeats, scale):
    args = _orbit_setup(scale)
    t_np, out_np = _timed(
        lambda: _kernels_np.orbit_stays(*args, 8, 0j, False), repeats)
    t_cy, agree = None, ""
    if _compiled is not None:
        t_cy, out_cy = _timed(
            lambda: _compiled.orbit_stays(*args, 8, 0j, False), repeats)
        same = np.array_equal(np.asarray(out_np), np.asarray(out_cy))
        agree = "masks match" if same else "masks DIFFER"
    _report("orbit_stays", args[2].shape[0], t_np, t_cy, agree)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0,
                    help="workload multiplier (0.2 for a quick pass)")
    opts = ap.parse_args()
    if _compiled is None:
        print("compiled lane not built; timing numpy lane only")
    bench_poly_escape(opts.repeats, opts.scale)
    bench_quad_resolvent(opts.repeats, opts.scale)
    bench_orbit_first_entry(opts.repeats, opts.scale)
    bench_orbit_stays(opts.repeats, opts.scale)


if __name__ == "__main__":
    main()
