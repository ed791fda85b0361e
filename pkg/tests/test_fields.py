"""Line fields: pushforward, sigma evaluators, transforms, diagnostics."""

import numpy as np
import pytest

from linefield.errors import (ConfigError, CriticalPoint, DomainViolation,
                              NotLattesLike, UnboundedSupport)
from linefield.fields import (AnalyticField, ConstantField, SampledField,
                              bounded_probe_field, divergence_scan, f_vector,
                              integral_diagnostics, invariance_residual,
                              lattes_field, load_sampled_field,
                              pushforward_field, save_sampled_field,
                              sigma_field, sigma_grid, sigma_n_field)
from linefield.grid import CellSet, Grid, fundamental_set, julia_cells
from linefield.poly import Poly
from linefield.ratmap import RationalMap
from linefield.transfer import CauchyPole, ResolventControl


@pytest.fixture()
def radial_field():
    # |1/x| / (1/x) = x/|x|
    return AnalyticField(Poly([1.0]), Poly([0.0, 1.0]))


# -- field classes -------------------------------------------------------------------


def test_constant_field_validation():
    ConstantField(np.exp(0.3j))
    ConstantField(0j)
    with pytest.raises(ConfigError):
        ConstantField(0.5 + 0j)


def test_constant_field_flags():
    u = ConstantField(1j)
    assert not u.compact_support and not u.is_zero()
    z = ConstantField(0j)
    assert z.compact_support and z.is_zero()


def test_analytic_field_unit_modulus(radial_field):
    xs = np.array([1 + 2j, -3j, 0.5 - 0.5j])
    vals = radial_field.evaluate(xs)
    assert np.allclose(np.abs(vals), 1.0, atol=1e-12)
    assert np.allclose(vals, xs / np.abs(xs), atol=1e-12)
    # zeros of q and nonfinite points evaluate to 0
    assert radial_field.evaluate(np.array([complex(np.inf, 0)]))[0] == 0
    with pytest.raises(ConfigError):
        AnalyticField(Poly([0.0]), Poly([1.0]))


def test_sampled_field_validation():
    g = Grid.square(0j, 1.0, 16)
    vals = np.exp(1j * np.arange(256).reshape(16, 16))
    SampledField(g, vals)
    with pytest.raises(ConfigError):
        SampledField(g, np.full((16, 16), 0.5 + 0j))
    with pytest.raises(ConfigError):
        SampledField(g, np.ones((8, 8), dtype=complex))


def test_sampled_field_off_grid_zero():
    g = Grid.square(0j, 1.0, 16)
    nu = SampledField(g, np.ones((16, 16), dtype=complex))
    assert nu.compact_support
    assert nu.evaluate(np.array([5 + 5j]))[0] == 0
    assert nu.evaluate(np.array([0.1 + 0.1j]))[0] == 1


def test_sampled_field_save_load(tmp_path):
    g = Grid.square(0.3 - 0.1j, 1.2, 24)
    cc = g.centers()
    vals = np.where(np.abs(cc) < 1.0, np.exp(1j * cc.real), 0j).reshape(24, 24)
    nu = SampledField(g, vals)
    path = tmp_path / "nu.npz"
    save_sampled_field(nu, path)
    back = load_sampled_field(path)
    assert back.grid == g
    assert np.array_equal(back.values, nu.values)


# -- pushforward ---------------------------------------------------------------------


def test_pushforward_constant_under_square(quad_c0):
    theta = 0.7
    zs = np.exp(1j * np.linspace(0.1, 6.0, 25)) * 1.3
    got = pushforward_field(quad_c0, ConstantField(np.exp(1j * theta)), zs)
    want = np.exp(1j * theta) * np.exp(-2j * np.angle(zs))
    assert np.max(np.abs(got - want)) < 1e-12
    assert np.max(np.abs(np.abs(got) - 1.0)) < 1e-12


def test_pushforward_radial_is_fixed_by_square(quad_c0, radial_field):
    zs = np.exp(1j * np.linspace(0.1, 6.0, 25)) * 1.3
    got = pushforward_field(quad_c0, radial_field, zs)
    assert np.max(np.abs(got - 1.0)) < 1e-12


def test_pushforward_rejects_critical_point(quad_c0):
    with pytest.raises(CriticalPoint):
        pushforward_field(quad_c0, ConstantField(1.0 + 0j), np.array([0j, 1j]))


def test_pushforward_scalar_shape(basilica):
    out = pushforward_field(basilica, ConstantField(1.0 + 0j), 1.5 + 0.5j)
    assert isinstance(out, complex)


# -- sigma ---------------------------------------------------------------------------


def test_sigma_square_cauchy_oracle(quad_c0):
    # c=0, psi=1/x: r = psi, so sigma = x/|x|
    assert abs(sigma_field(quad_c0, CauchyPole(0.0), 2.0) - 1.0) < 1e-9
    assert abs(sigma_field(quad_c0, CauchyPole(0.0), 2j) - 1j) < 1e-9
    with pytest.raises(DomainViolation):
        sigma_field(quad_c0, CauchyPole(0.0), 5e-4)


def test_sigma_grid_matches_pointwise(quad_c0):
    grid = Grid.square(0j, 1.8, 16)
    ctrl = ResolventControl(tol=1e-8, max_depth=24)
    sig = sigma_grid(quad_c0, CauchyPole(0.0), grid, ctrl)
    assert sig.shape == (16, 16)
    cc = grid.centers().reshape(16, 16)
    nz = sig != 0
    assert nz.any()
    assert np.max(np.abs(sig[nz] - cc[nz] / np.abs(cc[nz]))) < 1e-7
    # excluded centers come out 0, not an error
    assert np.all(np.abs(sig[~nz]) == 0)


@pytest.fixture(scope="module")
def cheb_fs(chebyshev):
    grid = Grid.square(0j, 2.2, 256)
    julia = julia_cells(chebyshev, grid)
    W = CellSet.from_disks(grid, [(-2.0 + 0j, 0.3), (2.0 + 0j, 0.3)])
    return fundamental_set(chebyshev, W, 1, julia=julia)


def test_sigma_n_three_cases(chebyshev, cheb_fs):
    ctrl = ResolventControl(tol=1e-4, max_depth=16, node_cap=1 << 17)
    psi = CauchyPole(-2.0)
    fs = cheb_fs

    # inside Kprime: plain sigma
    x0 = complex(fs.Kprime.centers()[3])
    assert abs(sigma_n_field(chebyshev, psi, fs, x0, 4, ctrl)
               - sigma_field(chebyshev, psi, x0, ctrl)) < 1e-12

    # first entry after one step: transported by conj(w)/w
    x1 = 1.4 + 0.001j
    fx1 = complex(chebyshev.eval_plane(x1))
    assert fs.Kprime.contains([fx1])[0] and not fs.Kprime.contains([x1])[0]
    w = complex(chebyshev.deriv_plane(x1))
    want = sigma_field(chebyshev, psi, fx1, ctrl) * np.conj(w) / w
    got = sigma_n_field(chebyshev, psi, fs, x1, 4, ctrl)
    assert abs(got - want) < 1e-12 and abs(abs(got) - 1.0) < 1e-9

    # never entering within depth: zero
    assert sigma_n_field(chebyshev, psi, fs, 10.0 + 10.0j, 4, ctrl) == 0j

    with pytest.raises(ConfigError):
        sigma_n_field(chebyshev, psi, fs, x0, -1, ctrl)


# -- transforms ----------------------------------------------------------------------


def test_f_vector_disk_transform():
    # constant 1 on the unit disk against the pole at 2: pi/2
    g = Grid.square(0j, 1.0, 128)
    cc = g.centers()
    disk = SampledField(
        g, np.where(np.abs(cc) <= 1.0, 1.0 + 0j, 0j).reshape(128, 128))
    fmap = RationalMap([2.0, 0, 1], [1])
    fv = f_vector(disk, fmap, n=100000, seed=11)
    assert fv.kind == "polynomial" and len(fv.components) == 1
    assert abs(fv.components[0] - np.pi / 2) <= 3 * fv.stderrs[0]


def test_f_vector_zero_field(basilica, rational_a):
    fz = f_vector(ConstantField(0j), basilica)
    assert fz.components == (0j,) and fz.stderrs == (0.0,)
    # rational maps carry three extra infinity components
    fr = f_vector(ConstantField(0j), rational_a)
    assert len(fr.components) == len(rational_a.critical_values) + 3


def test_f_vector_needs_compact_support(basilica):
    with pytest.raises(UnboundedSupport):
        f_vector(ConstantField(1.0 + 0j), basilica)


def test_f_vector_needs_kind():
    f = RationalMap([0, 0, 1], [1], kind=None)
    f = RationalMap.__new__(RationalMap)  # bypass auto-kind to get None
    object.__setattr__(f, "num", Poly([0, 0, 1.0]))
    object.__setattr__(f, "den", Poly([1.0]))
    object.__setattr__(f, "kind", None)
    with pytest.raises(ConfigError):
        f_vector(ConstantField(0j), f)


# -- invariant fields ----------------------------------------------------------------


def test_lattes_field_multiplier(lattes):
    res = lattes_field(lattes)
    assert abs(res.lam - 4.0) < 1e-9
    assert res.residual < 1e-10
    assert res.mu.evaluate(np.array([0.5 + 0.5j]))[0] != 0


def test_lattes_field_rejects_generic_map():
    with pytest.raises(NotLattesLike):
        lattes_field(RationalMap([1, 0, 1], [1]))


def test_invariance_residual_oracles(quad_c0, lattes, radial_field):
    mx, mean = invariance_residual(quad_c0, radial_field, 1000, seed=5)
    assert abs(mx - 2.0) < 1e-6  # sup over the plane, attained near the axis
    assert 0 < mean < mx

    res = lattes_field(lattes)
    mx, _ = invariance_residual(lattes, res.mu, 1000, seed=5)
    assert mx < 1e-8

    mx, mean = invariance_residual(quad_c0, ConstantField(0j), 200, seed=5)
    assert mx == 0.0 and mean == 0.0

    with pytest.raises(ConfigError):
        invariance_residual(quad_c0, radial_field, 0)


# -- diagnostics ---------------------------------------------------------------------


def test_divergence_scan_monotone(chebyshev):
    rows = divergence_scan(
        chebyshev, CauchyPole(-2.0), Grid.square(0j, 2.2, 64),
        [0.4, 0.2, 0.1, 0.05], mc_n=20000, seed=2,
        ctrl=ResolventControl(tol=1e-4, max_depth=14, node_cap=1 << 15))
    assert [d for d, _, _ in rows] == [0.4, 0.2, 0.1, 0.05]
    vals = [v for _, v, _ in rows]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ConfigError):
        divergence_scan(chebyshev, CauchyPole(-2.0),
                        Grid.square(0j, 2.2, 64), [0.0])


def test_integral_diagnostics_depth_zero_identity(chebyshev, cheb_fs):
    # at depth 0 both columns integrate the same |r| samples
    rows = integral_diagnostics(
        chebyshev, CauchyPole(-2.0), [cheb_fs], 0, mc_n=5000, seed=9,
        ctrl=ResolventControl(tol=1e-4, max_depth=0, node_cap=1 << 17))
    r0 = rows[0]
    assert abs(r0.int_abs_r - abs(r0.int_sigma_psi)) \
        < 1e-14 * max(1, r0.int_abs_r)
    assert r0.tail_bound == 0.0
    assert r0.depth == 0 and r0.n == 0


def test_bounded_probe_field_is_admissible(chebyshev):
    nu, support, outer = bounded_probe_field(chebyshev)
    assert nu.compact_support and not nu.is_zero()
    (slo, shi), (olo, ohi) = support, outer
    assert olo.real <= slo.real and olo.imag <= slo.imag
    assert ohi.real >= shi.real and ohi.imag >= shi.imag
    inside = nu.values[np.abs(nu.values) > 0]
    assert np.allclose(np.abs(inside), 1.0, atol=1e-12)
