"""Backend lanes must agree: exact for integer outputs, tight for floats."""

import numpy as np
import pytest

from linefield import _kernels_np
from linefield import kernels
from linefield.grid import Grid, julia_cells
from linefield.ratmap import RationalMap

try:
    from linefield import _kernels as _compiled
except ImportError:
    _compiled = None

needs_compiled = pytest.mark.skipif(
    _compiled is None, reason="compiled kernel extension not built")


def _escape_inputs():
    grid = Grid.square(0j, 1.8, 96)
    coeffs = np.array([-1.0, 0.0, 1.0], dtype=complex)
    return coeffs, grid.corner_lattice()


def test_backend_reports_a_lane():
    assert kernels.BACKEND in ("numpy", "cython")


def test_distance_estimate_inf_for_bounded_orbits():
    coeffs, pts = _escape_inputs()
    times, zabs2, dzabs2, dzexp = _kernels_np.poly_escape(coeffs, pts, 128, 1e3)
    de = kernels.distance_estimate(times, zabs2, dzabs2, dzexp)
    assert np.all(np.isinf(de[times < 0]))
    assert np.all(np.isfinite(de[times >= 0]))
    assert np.all(de[times >= 0] >= 0)


def test_distance_estimate_all_bounded():
    times = np.array([-1, -1])
    z = np.zeros(2)
    de = kernels.distance_estimate(times, z, z, np.zeros(2, dtype=np.int64))
    assert np.all(np.isinf(de))


@needs_compiled
def test_poly_escape_lanes_agree():
    coeffs, pts = _escape_inputs()
    t_np, za_np, dza_np, de_np = _kernels_np.poly_escape(coeffs, pts, 128, 1e3)
    t_cy, za_cy, dza_cy, de_cy = _compiled.poly_escape(coeffs, pts, 128, 1e3)
    assert np.array_equal(t_np, t_cy)
    assert np.array_equal(de_np, de_cy)
    esc = t_np >= 0
    for a, b in ((za_np, za_cy), (dza_np, dza_cy)):
        assert np.allclose(a[esc], b[esc], rtol=5e-15, atol=0)


@needs_compiled
def test_quad_resolvent_lanes_agree():
    rng = np.random.default_rng(2)
    n = 80
    xs = (2.0 + 0.25 * rng.uniform(0.4, 1.0, n)) * np.exp(2j * np.pi * rng.random(n))
    args = (-2.0 + 0j, -2.0 + 0j, xs, 1e-6, 14, 1 << 15)
    v_np, a_np, d_np, t_np, s_np = _kernels_np.quad_resolvent(*args)
    v_cy, a_cy, d_cy, t_cy, s_cy = _compiled.quad_resolvent(*args)
    assert np.array_equal(s_np, s_cy)
    assert np.array_equal(d_np, d_cy)
    ok = s_np != 3
    assert np.allclose(v_np[ok], v_cy[ok], rtol=5e-13, atol=1e-300)
    assert np.allclose(a_np[ok], a_cy[ok], rtol=5e-13, atol=1e-300)
    assert np.allclose(t_np[ok], t_cy[ok], rtol=5e-13, atol=1e-300)


@needs_compiled
def test_orbit_kernels_lanes_agree(basilica):
    grid = Grid.square(0j, 1.8, 128)
    mask = julia_cells(basilica, grid).mask
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1.8, 1.8, 4000) + 1j * rng.uniform(-1.8, 1.8, 4000)
    num = basilica.num.coeffs
    den = basilica.den.coeffs
    base = (num, den, pts, grid.lo.real, grid.lo.imag, grid.cell,
            grid.resolution, mask)
    inf_args = (complex(np.nan, np.nan), False)
    fe_np = _kernels_np.orbit_first_entry(*base, 8, *inf_args)
    fe_cy = _compiled.orbit_first_entry(*base, 8, *inf_args)
    assert np.array_equal(fe_np, fe_cy)
    st_np = _kernels_np.orbit_stays(*base, 8, *inf_args)
    st_cy = _compiled.orbit_stays(*base, 8, *inf_args)
    assert np.array_equal(st_np, st_cy)
