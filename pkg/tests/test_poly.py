import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as npp

from linefield.poly import (
    Poly,
    format_coefficient,
    horner_eval,
    parse_coefficient,
    roots,
    roots_batch,
)


def test_horner_quadratic():
    p = Poly([1.0, 0.0, 1.0])  # z^2 + 1
    v, d = p.eval_with_derivative(2.0)
    assert v == 5.0 and d == 4.0


def test_horner_constant():
    v, d = horner_eval([7.0], 3.0 + 1j)
    assert v == 7.0 and d == 0.0


def test_horner_triple_root():
    p = Poly.from_roots([1.0, 1.0, 1.0])
    v, d = p.eval_with_derivative(1.0)
    assert v == 0.0 and d == 0.0


def test_horner_vectorized_matches_scalar():
    p = Poly([1.0, -2.0, 0.5, 1.0j])
    zs = np.array([0.3 + 0.1j, -2.0, 1.5j])
    v, d = p.eval_with_derivative(zs)
    for z, vi, di in zip(zs, v, d):
        vs, ds = p.eval_with_derivative(complex(z))
        assert abs(vi - vs) < 1e-14 and abs(di - ds) < 1e-14


def test_trailing_zeros_trimmed():
    p = Poly([1.0, 2.0, 0.0, 0.0])
    assert p.degree == 1
    assert Poly([0.0, 0.0]).degree == 0


def test_roots_classic():
    got = roots(Poly([1.0, 0.0, 1.0]))
    assert got == [(-1j, 1), (1j, 1)] or [
        (r, m) for r, m in got
    ] == sorted([(1j, 1), (-1j, 1)], key=lambda rm: (rm[0].real, rm[0].imag))
    for r, m in got:
        assert m == 1
        assert abs(r * r + 1) < 1e-12


def test_roots_forced_multiplicity():
    p = Poly.from_roots([1.0, 1.0, -2.0])
    got = roots(p)
    assert sorted(m for _, m in got) == [1, 2]
    by_mult = {m: r for r, m in got}
    assert abs(by_mult[2] - 1.0) < 1e-6
    assert abs(by_mult[1] + 2.0) < 1e-9


def test_roots_constant_rejected():
    with pytest.raises(ValueError):
        roots(Poly([3.0]))


def test_roots_scaling_invariance():
    p = Poly([2.0, -1.0, 0.5j, 1.0])
    a = roots(p)
    b = roots(Poly(p.coeffs * (3.7 - 1.2j)))
    assert len(a) == len(b)
    for (ra, ma), (rb, mb) in zip(a, b):
        assert ma == mb and abs(ra - rb) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2.0, allow_nan=False,
                                   allow_infinity=False),
                min_size=1, max_size=12))
def test_roots_reconstruct_coefficients(true_roots):
    # resolvable configurations only: pairwise separation above the merge radius
    arr = np.asarray(true_roots, dtype=complex)
    for i in range(len(arr)):
        for j in range(i):
            if abs(arr[i] - arr[j]) < 0.05:
                return
    p = Poly.from_roots(arr, lead=1.5 - 0.5j)
    got = roots(p)
    flat = [r for r, m in got for _ in range(m)]
    rebuilt = p.coeffs[-1] * npp.polyfromroots(flat)
    scale = np.max(np.abs(p.coeffs))
    assert np.max(np.abs(rebuilt - p.coeffs)) <= 1e-8 * scale


def test_roots_residual_contract():
    p = Poly([1.0, 2.0, -0.3j, 0.9, 1.0])
    for r, _ in roots(p, tol=1e-9):
        assert abs(p(r)) <= 1e-9 * p.scale()


def test_roots_multiplicity_derivative_property():
    p = Poly.from_roots([0.5 + 0.5j, 0.5 + 0.5j, -1.0])
    for r, m in roots(p):
        q = p
        for k in range(m - 1):
            q = q.derivative()
            assert abs(q(r)) <= 1e-6 * q.scale()
        assert abs(q.derivative()(r)) > 1e-6 * q.derivative().scale()


def test_roots_batch_matches_roots():
    rows = np.array([
        [1.0, 0.0, 1.0],
        [-2.0, 0.0, 1.0],
        [1.0 + 1j, 2.0, 1.0],
    ], dtype=complex)
    got = roots_batch(rows)
    key = lambda z: (z.real, z.imag)
    for row, rts in zip(rows, got):
        want = sorted((r for r, _ in roots(Poly(row))), key=key)
        have = sorted(rts, key=key)
        for a, b in zip(want, have):
            assert abs(a - b) < 1e-8


def test_roots_batch_shape_contract():
    with pytest.raises(ValueError):
        roots_batch(np.array([[1.0]]))


@settings(max_examples=80, deadline=None)
@given(st.complex_numbers(max_magnitude=1e12, allow_nan=False,
                          allow_infinity=False))
def test_coefficient_text_round_trip(c):
    assert parse_coefficient(format_coefficient(c)) == c


def test_coefficient_parse_forms():
    assert parse_coefficient("1.5") == 1.5
    assert parse_coefficient("-2i") == -2j
    assert parse_coefficient("3+4i") == 3 + 4j
    with pytest.raises(ValueError):
        parse_coefficient("not-a-number")


def test_poly_parse_format_round_trip():
    p = Poly.parse("1+0i,0+0i,1+0i")
    assert p.degree == 2 and p(2.0) == 5.0
    assert Poly.parse(p.format()).coeffs.tolist() == p.coeffs.tolist()


def test_compose():
    outer = Poly([0.0, 0.0, 1.0])  # z^2
    inner = Poly([1.0, 1.0])       # z + 1
    comp = outer.compose(inner)
    zs = np.linspace(-2, 2, 7)
    assert np.max(np.abs(comp(zs) - (zs + 1) ** 2)) < 1e-12


def test_arithmetic():
    p = Poly([1.0, 1.0])
    q = p * p - Poly([1.0, 2.0, 1.0])
    assert q.is_zero()
    assert (p + 1.0)(1.0) == 3.0
    assert (p ** 3)(1.0) == 8.0
    with pytest.raises(ValueError):
        p ** -1


def test_reversed():
    p = Poly([1.0, 2.0, 3.0])
    w = 0.5 + 0.25j
    assert abs(p.reversed()(w) - w ** 2 * p(1.0 / w)) < 1e-12
