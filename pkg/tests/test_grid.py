"""Grid geometry, cell sets, Julia models, fundamental sets, integration."""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linefield.errors import ConfigError, PoleInRegion, SeedNotRepelling
from linefield.grid import (CellMidpoint, CellSet, Grid, MonteCarlo,
                            PolarRefined, fundamental_set, integrate,
                            julia_cells, load_cellset, pullback_partition)
from linefield.ratmap import RationalMap


# -- grid geometry -------------------------------------------------------------------


def test_square_constructor_geometry():
    g = Grid.square(1 - 2j, 1.5, 64)
    assert g.lo == (-0.5 - 3.5j) and g.hi == (2.5 - 0.5j)
    assert g.cell == pytest.approx(3.0 / 64)
    assert g.cell_area == pytest.approx((3.0 / 64) ** 2)
    assert g.cell_diag == pytest.approx(g.cell * np.sqrt(2))
    assert g.box_tuple() == [-0.5, -3.5, 2.5, -0.5]


def test_grid_validation():
    with pytest.raises(ConfigError):
        Grid(1 + 1j, 1 + 2j, 16)  # zero width
    with pytest.raises(ConfigError):
        Grid(0j, 1 + 2j, 16)  # not square
    with pytest.raises(ConfigError):
        Grid.square(0j, 1.0, 4)  # resolution floor


def test_centers_layout():
    g = Grid.square(0j, 1.0, 8)
    c = g.centers()
    assert c.shape == (64,)
    # flat index iy*res + ix: first entry is the bottom-left cell
    assert c[0] == pytest.approx(g.lo + (0.5 + 0.5j) * g.cell)
    assert c[1] == pytest.approx(c[0] + g.cell)
    assert c[8] == pytest.approx(c[0] + 1j * g.cell)
    corners = g.corner_lattice()
    assert corners.shape == (81,)
    assert corners[0] == g.lo and corners[-1] == g.hi


@settings(max_examples=40, deadline=None)
@given(
    cx=st.floats(-3, 3), cy=st.floats(-3, 3),
    hw=st.floats(0.1, 5.0),
    res=st.integers(8, 96),
)
def test_cell_of_inverts_centers(cx, cy, hw, res):
    g = Grid.square(complex(cx, cy), hw, res)
    idx = g.cell_of(g.centers())
    assert np.array_equal(idx, np.arange(res * res))


def test_cell_of_outside_and_nonfinite():
    g = Grid.square(0j, 1.0, 16)
    pts = [5 + 5j, -5j, complex(np.inf, 0), complex(0, np.nan), 1e300 + 0j]
    assert np.all(g.cell_of(pts) == -1)


# -- cell sets -----------------------------------------------------------------------


def test_from_disks_area():
    g = Grid.square(0j, 1.0, 256)
    disk = CellSet.from_disks(g, [(0j, 0.8)])
    # center-in-disk marking: off by at most ~perimeter*cell
    slack = 2 * np.pi * 0.8 * g.cell * 2
    assert abs(disk.area - np.pi * 0.64) < slack
    assert disk.count > 0 and not disk.is_empty()


def test_set_operations():
    g = Grid.square(0j, 1.0, 32)
    a = CellSet.from_disks(g, [(-0.3 + 0j, 0.4)])
    b = CellSet.from_disks(g, [(0.3 + 0j, 0.4)])
    assert (a | b).count == a.count + b.count - (a & b).count
    assert ((a - b) & b).is_empty()
    assert ((a - b) | (a & b)).count == a.count
    assert (a - a).is_empty()
    full, empty = g.full_region(), g.empty_region()
    assert (a | empty).count == a.count
    assert (a & full).count == a.count


def test_set_operations_require_same_grid():
    a = Grid.square(0j, 1.0, 32).full_region()
    b = Grid.square(0j, 1.0, 64).full_region()
    with pytest.raises(ConfigError):
        a | b


def test_mask_shape_validated():
    g = Grid.square(0j, 1.0, 16)
    with pytest.raises(ConfigError):
        CellSet(g, np.ones((8, 8)))


def test_contains_matches_predicate():
    g = Grid.square(0j, 1.0, 64)
    region = CellSet.from_predicate(g, lambda z: z.real > 0.1)
    probe = np.array([0.5 + 0.3j, -0.5 + 0.3j, 0.5 + 5j])
    assert list(region.contains(probe)) == [True, False, False]


def test_cellset_save_load_round_trip(tmp_path):
    g = Grid.square(0.5 - 0.25j, 1.25, 48)
    region = CellSet.from_disks(g, [(0.5 + 0j, 0.7), (-0.2 - 0.9j, 0.3)])
    path = tmp_path / "region.pbm"
    region.save(path)
    assert path.read_bytes().startswith(b"P4")
    assert (tmp_path / "region.pbm.json").exists()
    back = load_cellset(path)
    assert back.grid == g
    assert np.array_equal(back.mask, region.mask)


def test_load_cellset_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_cellset(tmp_path / "missing.pbm")
    bad = tmp_path / "bad.pbm"
    bad.write_bytes(b"P5\n2 2\n255\n\x00\x00\x00\x00")
    bad.with_suffix(".pbm.json").write_text(
        '{"box": [0, 0, 1, 1], "resolution": 8}')
    with pytest.raises(ValueError):
        load_cellset(bad)


# -- Julia models --------------------------------------------------------------------


def test_julia_cells_basilica(basilica):
    g = Grid.square(0j, 1.8, 192)
    jul = julia_cells(basilica, g)
    beta = (1 + np.sqrt(5)) / 2  # repelling fixed point on the boundary
    assert jul.contains([beta + 0j])[0]
    assert not jul.contains([1.7 + 1.7j])[0]  # deep exterior
    assert not jul.contains([0j])[0]  # interior of the cycle basin


def test_julia_cells_real_segment(chebyshev):
    g = Grid.square(0j, 2.2, 192)
    jul = julia_cells(chebyshev, g)
    on = np.linspace(-1.9, 1.9, 9) + 0j
    assert np.all(jul.contains(on))
    assert not jul.contains([1j])[0]


def test_julia_cells_inverse_branch(rational_a):
    g = Grid.square(0j, 3.0, 96)
    jul = julia_cells(rational_a, g, seed=5)
    again = julia_cells(rational_a, g, seed=5)
    assert np.array_equal(jul.mask, again.mask)
    assert not jul.is_empty()
    # the repelling fixed point seeding the walk lies in the model
    assert jul.contains([1j * np.sqrt(3)])[0]


def test_julia_cells_needs_repelling_seed():
    newton = RationalMap([-1, 0, 1], [0, 2])  # both finite fixed points superattracting
    with pytest.raises(SeedNotRepelling):
        julia_cells(newton, Grid.square(0j, 2.0, 64))


# -- fundamental sets ----------------------------------------------------------------


@pytest.fixture(scope="module")
def cheb_setup(chebyshev):
    grid = Grid.square(0j, 2.2, 128)
    jul = julia_cells(chebyshev, grid)
    W = CellSet.from_disks(grid, [(-2 + 0j, 0.3), (2 + 0j, 0.3)])
    return grid, jul, W


def test_fundamental_set_structure(chebyshev, cheb_setup):
    grid, jul, W = cheb_setup
    fs = fundamental_set(chebyshev, W, 1, julia=jul)
    assert not fs.K_empty and not fs.Kprime_empty
    assert (fs.K & fs.Kprime).is_empty()
    assert (fs.K - W).is_empty()
    assert (fs.K - jul).is_empty() and (fs.Kprime - jul).is_empty()
    assert fs.horizon == 1


def test_fundamental_set_horizon_shrinks_K(chebyshev, cheb_setup):
    grid, jul, W = cheb_setup
    k1 = fundamental_set(chebyshev, W, 1, julia=jul).K
    k2 = fundamental_set(chebyshev, W, 2, julia=jul).K
    assert np.all(k2.mask <= k1.mask)


def test_fundamental_set_horizon_inclusion_nonempty():
    q = RationalMap([0, 0, 1], [1])
    grid = Grid.square(0j, 1.8, 128)
    jul = julia_cells(q, grid)
    band = CellSet.from_predicate(
        grid, lambda z: (np.abs(z) > 0.7) & (np.abs(z) < 1.3))
    with warnings.catch_warnings():
        # the band misses the postcritical point 0 by design
        warnings.simplefilter("ignore")
        k1 = fundamental_set(q, band, 1, julia=jul).K
        k4 = fundamental_set(q, band, 4, julia=jul).K
    assert not k4.is_empty()
    assert np.all(k4.mask <= k1.mask)


def test_fundamental_set_warns_on_uncovered_cloud(chebyshev, cheb_setup):
    grid, jul, _ = cheb_setup
    half = CellSet.from_disks(grid, [(2 + 0j, 0.3)])  # misses -2
    with pytest.warns(UserWarning, match="postcritical"):
        fundamental_set(chebyshev, half, 1, julia=jul)


def test_fundamental_set_validation(chebyshev, cheb_setup):
    grid, jul, W = cheb_setup
    with pytest.raises(ConfigError):
        fundamental_set(chebyshev, W, 0, julia=jul)
    other = julia_cells(chebyshev, Grid.square(0j, 2.2, 64))
    with pytest.raises(ConfigError):
        fundamental_set(chebyshev, W, 1, julia=other)


def test_pullback_partition_disjoint_and_monotone(chebyshev, cheb_setup):
    grid, jul, W = cheb_setup
    fs = fundamental_set(chebyshev, W, 1, julia=jul)
    coverage = []
    for depth in (0, 2, 4, 6):
        part = pullback_partition(chebyshev, fs, depth)
        assert len(part.layers) == depth + 1
        assert part.disjoint
        coverage.append(part.coverage_fraction)
    part = pullback_partition(chebyshev, fs, 6)
    for i, layer in enumerate(part.layers):
        assert (layer & fs.K).is_empty()
        for other in part.layers[i + 1:]:
            assert (layer & other).is_empty()
        assert (layer - jul).is_empty()
    assert all(a <= b for a, b in zip(coverage, coverage[1:]))
    assert coverage[-1] <= 1.0


def test_pullback_partition_depth_validated(chebyshev, cheb_setup):
    grid, jul, W = cheb_setup
    fs = fundamental_set(chebyshev, W, 1, julia=jul)
    with pytest.raises(ConfigError):
        pullback_partition(chebyshev, fs, -1)


# -- integration ---------------------------------------------------------------------


def test_midpoint_exact_on_constants():
    region = Grid.square(0j, 1.0, 64).full_region()
    est, err = integrate(lambda x: np.ones_like(x), region, CellMidpoint())
    assert est == pytest.approx(region.area, abs=1e-13)
    assert err == 0.0


def test_midpoint_odd_cancellation():
    region = Grid.square(0j, 1.0, 64).full_region()
    est, _ = integrate(lambda x: x, region, CellMidpoint())
    assert abs(est) < 1e-13


def test_midpoint_rejects_enclosed_pole():
    region = Grid.square(0j, 1.0, 64).full_region()
    with pytest.raises(PoleInRegion):
        integrate(lambda x: 1 / x, region, CellMidpoint(poles=(0.1 + 0j,)))
    est, _ = integrate(lambda x: 1 / x, region, CellMidpoint(poles=(9 + 0j,)))
    assert np.isfinite(abs(est))


def test_monte_carlo_deterministic_and_exact_on_ones():
    g = Grid.square(0j, 1.0, 32)
    region = CellSet.from_disks(g, [(0j, 0.6)])
    e1 = integrate(lambda x: np.ones_like(x), region, MonteCarlo(4000, 9))
    e2 = integrate(lambda x: np.ones_like(x), region, MonteCarlo(4000, 9))
    assert e1 == e2
    assert e1[0] == pytest.approx(region.area, abs=1e-12)
    e3 = integrate(lambda x: x, region, MonteCarlo(4000, 9))
    e4 = integrate(lambda x: x, region, MonteCarlo(4000, 10))
    assert e3 != e4


def test_monte_carlo_samples_stay_in_region():
    g = Grid.square(0j, 1.0, 32)
    region = CellSet.from_disks(g, [(0.4 + 0.4j, 0.3)])
    seen = {}

    def spy(x):
        seen["pts"] = x
        return np.ones_like(x)

    integrate(spy, region, MonteCarlo(2000, 1))
    assert np.all(region.contains(seen["pts"]))


def test_polar_refined_integrable_singularity():
    g = Grid.square(0j, 1.0, 128)
    disk = CellSet.from_disks(g, [(0j, 0.8)])
    est, err = integrate(lambda x: 1.0 / np.abs(x), disk,
                         PolarRefined(60000, 7, poles=(0j,)))
    true = 2 * np.pi * 0.8
    # boundary cells are center-marked, so allow a resolution term
    assert abs(est - true) <= 5 * err + 0.03 * true
    assert 0 < err < 0.1


def test_polar_refined_far_pole_falls_back():
    g = Grid.square(0j, 1.0, 32)
    disk = CellSet.from_disks(g, [(0j, 0.6)])
    a = integrate(lambda x: x ** 2, disk, PolarRefined(5000, 3, poles=(50 + 50j,)))
    b = integrate(lambda x: x ** 2, disk, MonteCarlo(5000, 3))
    assert a == b


def test_integrate_empty_and_bad_scheme():
    g = Grid.square(0j, 1.0, 16)
    assert integrate(lambda x: x, g.empty_region(), CellMidpoint()) == (0j, 0.0)
    with pytest.raises(ConfigError):
        integrate(lambda x: x, g.full_region(), MonteCarlo(0, 1))
    with pytest.raises(ConfigError):
        integrate(lambda x: x, g.full_region(), "midpoint")
