import numpy as np
import pytest

from linefield.errors import (
    ConfigError,
    DomainViolation,
    NearCriticalValue,
    ZeroOrbitDerivative,
)
from linefield.fields import SampledField, pushforward_field
from linefield.grid import Grid, _mc_stats, _region_samples
from linefield.ratmap import RationalMap, load_map
from linefield.transfer import (
    CauchyPole,
    Custom,
    InversePower,
    ResolventControl,
    SphereKernel,
    abel_resolvent_quadratic,
    preimages,
    resolvent,
    transfer_apply,
)
from linefield.transfer import test_functions as function_catalog

RNG = np.random.default_rng(7)


def test_preimages_count_and_consistency(basilica):
    x = 0.7 + 0.4j
    branches = preimages(basilica, x)
    assert len(branches) == basilica.degree
    for b in branches:
        assert not b.point.at_infinity
        y = b.point.value
        img = basilica.eval_map(y).image
        assert abs(img.value - x) < 1e-9
        assert abs(b.fprime - 2 * y) < 1e-9


def test_preimages_reject_critical_value(basilica):
    # x = critical value -1: the two square-root branches coincide at 0
    with pytest.raises(NearCriticalValue):
        preimages(basilica, -1.0 + 0j)


def test_preimages_of_a_include_infinity(rational_a):
    branches = preimages(rational_a, rational_a.a_value)
    assert any(b.point.at_infinity for b in branches)


def test_transfer_apply_matches_manual_sum(chebyshev):
    g = CauchyPole(0.5 + 0.2j)
    for _ in range(25):
        x = complex(RNG.uniform(-2, 2), RNG.uniform(0.3, 2))
        lhs = transfer_apply(chebyshev, g, x)
        manual = 0j
        for s in np.roots([1, 0, -(x + 2)]):  # preimages of x under z^2 - 2
            manual += g(complex(s)) / (2 * s) ** 2
        assert abs(lhs - manual) < 1e-9 * (1 + abs(lhs))


def test_transfer_apply_absolute(quad_c0):
    g = CauchyPole(0j)
    x = 2.0 + 0j
    plain = transfer_apply(quad_c0, g, x)
    absval = transfer_apply(quad_c0, g, x, absolute=True)
    # the two square-root branches cancel exactly; absolutes do not
    assert abs(plain) < 1e-12
    assert absval > 0.1


def test_transfer_apply_constant_g(quad_c0):
    # g = 1: sum of 1/(2y)^2 over y = +/-sqrt(x) is 1/(2x)
    for x in (2.0 + 0j, -1.3 + 0.4j):
        got = transfer_apply(quad_c0, lambda y: 1.0 + 0j, x)
        assert abs(got - 1.0 / (2 * x)) < 1e-12


def test_transfer_apply_pole_closed_form():
    c = 0.25 + 0.1j
    f = RationalMap([c, 0, 1], [1])
    z0 = 1.4 - 0.8j
    for x in (0.9 + 1.2j, -1.1 - 0.7j):
        got = transfer_apply(f, lambda y: 1.0 / (z0 - y), x)
        want = z0 / (2 * (x - c) * (z0 * z0 + c - x))
        assert abs(got - want) < 1e-11


def test_resolvent_identity_family(quad_c0):
    # c = 0, psi = 1/x: T psi = 0, so r = psi exactly
    psi = CauchyPole(0j)
    for _ in range(20):
        x = complex(RNG.uniform(1.2, 3), 0) * np.exp(2j * np.pi * RNG.uniform())
        ev = resolvent(quad_c0, psi, x)
        assert ev.in_domain
        assert abs(ev.value - 1.0 / x) < 1e-10


def test_resolvent_equation_invariant(chebyshev):
    # r = psi + T r at the evaluation tolerance
    ctrl = ResolventControl(tol=1e-7, max_depth=18, node_cap=1 << 18)
    psi = CauchyPole(-2.0 + 0j)
    for x in (0.9 + 1.1j, -0.4 + 1.6j):
        r_x = resolvent(chebyshev, psi, x, ctrl).value
        t_r = transfer_apply(
            chebyshev, lambda y: resolvent(chebyshev, psi, y, ctrl).value, x)
        resid = abs(r_x - t_r - psi(x))
        assert resid <= 10 * ctrl.tol * (1 + abs(r_x))


def test_resolvent_abs_value_monotone_in_depth(chebyshev):
    psi = CauchyPole(-2.0 + 0j)
    x = 0.5 + 0.9j
    prev = 0.0
    for depth in range(1, 8):
        ctrl = ResolventControl(tol=1e-300, max_depth=depth, node_cap=1 << 16)
        ev = resolvent(chebyshev, psi, x, ctrl)
        assert ev.abs_value >= prev - 1e-15
        prev = ev.abs_value


def test_resolvent_depth_and_tail_reported(chebyshev):
    psi = CauchyPole(-2.0 + 0j)
    ev = resolvent(chebyshev, psi, 1j,
                   ResolventControl(tol=1e-6, max_depth=20, node_cap=1 << 18))
    assert 0 < ev.depth_used <= 20
    assert ev.tail_estimate >= 0


def test_resolvent_domain_violation(chebyshev):
    psi = CauchyPole(-2.0 + 0j)
    with pytest.raises(DomainViolation):
        resolvent(chebyshev, psi, 2.0 + 0j)  # postcritical point
    with pytest.raises(DomainViolation):
        resolvent(chebyshev, psi, float("inf") + 0j)


def test_resolvent_near_critical_value(quad_c0):
    # disable the postcritical exclusion so the tree itself hits the branch merge
    ctrl = ResolventControl(tol=1e-9, max_depth=6, node_cap=1 << 10,
                            exclusion_radius=1e-20)
    with pytest.raises(NearCriticalValue):
        resolvent(quad_c0, CauchyPole(5.0 + 0j), 1e-15 + 0j, ctrl)


def test_resolvent_general_tree_matches_quad_path(chebyshev):
    # same map expressed with a non-trivial denominator forces the generic solver
    same = RationalMap([-2.0, 0, 1], [1.0])
    generic = RationalMap([-4.0, 0, 2], [2.0])
    psi = CauchyPole(-2.0 + 0j)
    ctrl = ResolventControl(tol=1e-8, max_depth=14, node_cap=1 << 15)
    for x in (1j, 0.8 + 0.7j):
        a = resolvent(same, psi, x, ctrl).value
        b = resolvent(generic, psi, x, ctrl).value
        assert abs(a - b) < 1e-7 * (1 + abs(a))


def test_sphere_kernel_partial_fractions():
    z = 1.7 - 0.6j
    k = SphereKernel(z)
    xs = RNG.uniform(-3, 3, 40) + 1j * RNG.uniform(-3, 3, 40)
    direct = (z - 1) / xs - z / (xs - 1) + 1.0 / (xs - z)
    assert np.max(np.abs(k(xs) - direct)) < 1e-12
    # coefficient sum zero makes the kernel integrable at infinity
    assert abs((z - 1) - z + 1) == 0


def test_sphere_kernel_marked_points_rejected():
    for bad in (0j, 1.0 + 0j):
        with pytest.raises(Exception):
            SphereKernel(bad)


def test_inverse_power_orders():
    a = 0.3 + 0.1j
    x = 1.2 - 0.4j
    for k in (1, 2, 3):
        assert abs(InversePower(a, k)(x) - 1.0 / (x - a) ** k) < 1e-14
    with pytest.raises(Exception):
        InversePower(a, 4)


def test_catalog_polynomial(chebyshev):
    cat = function_catalog(chebyshev)
    assert all(isinstance(g, CauchyPole) for g in cat)
    vs = sorted(g.v.real for g in cat)
    assert len(vs) == 1 and abs(vs[0] + 2) < 1e-12


def test_catalog_rational(rational_a):
    cat = function_catalog(rational_a)
    cauchy = [g for g in cat if isinstance(g, CauchyPole)]
    inv = [g for g in cat if isinstance(g, InversePower)]
    assert len(cauchy) == len(rational_a.critical_values)
    assert sorted(g.k for g in inv) == [1, 2, 3]
    assert all(abs(g.a - rational_a.a_value) < 1e-12 for g in inv)


def test_catalog_sphere():
    g = load_map("maps/lattes_sphere.map")
    cat = function_catalog(g)
    assert cat and all(isinstance(k, SphereKernel) for k in cat)


def test_catalog_requires_kind(lattes):
    with pytest.raises(ConfigError):
        function_catalog(lattes)  # unclassified map has no catalog


def test_custom_kernel():
    g = Custom(lambda x: x * 0 + 1.0, declared_poles=())
    assert g.poles == ()
    assert g(np.array([1j])).tolist() == [1.0 + 0j]


def test_abel_zero_orbit_derivative():
    with pytest.raises(ZeroOrbitDerivative):
        abel_resolvent_quadratic(0j, 3.0 + 0j, [0.5])


def test_abel_lambda_range():
    with pytest.raises(ValueError):
        abel_resolvent_quadratic(-2.0, 0j, [1.5])


def test_abel_closed_form_chebyshev():
    # c = -2, x = 0: the orbit series telescopes to r_lambda(0) = 1/(2 - lambda)
    # (numerator 0.5/(1 - lambda/4), weight sum (1 - lambda/2)/(1 - lambda/4))
    lams = [0.5, 0.9, 0.999]
    evs = abel_resolvent_quadratic(-2.0 + 0j, 0j, lams)
    for lam, ev in zip(lams, evs):
        want = 0.5 / (1.0 - lam / 2.0)
        assert abs(ev.value - want) < 1e-12, (lam, ev.value, want)
        d_want = (1.0 - lam / 2.0) / (1.0 - lam / 4.0)
        assert abs(ev.d_value - d_want) < 1e-12
    assert abs(evs[0].d_value - 6.0 / 7.0) < 1e-12  # lambda = 1/2


def test_duality_pushforward_vs_transfer(basilica):
    # integral of g * (f* nu) equals integral of (T g) * nu for a bounded nu
    grid = Grid.square(1.0 + 0.2j, 0.35, 48)
    region = grid.full_region()
    nu = SampledField(grid, np.ones((48, 48), dtype=complex))
    g = CauchyPole(5.0 + 0j)

    rng = np.random.default_rng(21)
    ys = _region_samples(region, rng, 4000)
    t_vals = np.array([transfer_apply(basilica, g, complex(y)) for y in ys])
    rhs, rhs_se = _mc_stats(t_vals, region.area)

    # the pushforward side integrates over the two preimage patches
    outer = Grid.square(0j, 2.0, 8)
    xs = _region_samples(outer.full_region(), rng, 200000)
    inside = region.contains(basilica.eval_plane(xs))
    vals = np.zeros(xs.shape, dtype=complex)
    sel = xs[inside]
    vals[inside] = g(sel) * pushforward_field(basilica, nu, sel)
    lhs, lhs_se = _mc_stats(vals, outer.full_region().area)

    err = abs(lhs - rhs)
    assert err <= 4 * np.hypot(lhs_se, rhs_se), (lhs, rhs, lhs_se, rhs_se)
