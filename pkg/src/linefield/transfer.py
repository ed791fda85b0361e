"""Preimages, the operators T and |T|, truncated resolvents, and the
quadratic-family Abel formula.

The transfer operator acts by (T g)(x) = sum of g(y)/f'(y)^2 over the
preimages y of x; its absolute companion |T| drops the phases. Resolvents
r = sum of T^i(psi) are evaluated by breadth-first preimage trees, with a
fast compiled path for monic quadratics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    ConfigError,
    DomainViolation,
    NearCriticalValue,
    SlowDecay,
    ZeroOrbitDerivative,
)
from . import kernels
from .poly import Poly, multiplicity_radius, roots, roots_batch
from .ratmap import (
    PostcriticalCloud,
    RationalMap,
    SpherePoint,
    as_sphere,
    postcritical_cloud,
)

__all__ = [
    "CauchyPole",
    "InversePower",
    "SphereKernel",
    "Custom",
    "TestFunction",
    "PreimageBranch",
    "preimages",
    "transfer_apply",
    "ResolventControl",
    "ResolventEval",
    "resolvent",
    "AbelEval",
    "abel_resolvent_quadratic",
    "test_functions",
]


# -- test functions ----------------------------------------------------------------


@dataclass(frozen=True)
class CauchyPole:
    """psi(x) = 1/(x - v)."""

    v: complex

    @property
    def poles(self) -> tuple[complex, ...]:
        return (self.v,)

    def __call__(self, x):
        return 1.0 / (np.asarray(x, dtype=complex) - self.v)

    def label(self) -> str:
        return f"1/(x - ({self.v:g}))"


@dataclass(frozen=True)
class InversePower:
    """psi(x) = 1/(x - a)^k with k in {1, 2, 3}."""

    a: complex
    k: int

    def __post_init__(self) -> None:
        if self.k not in (1, 2, 3):
            raise ValueError(f"power must be 1, 2 or 3, got {self.k}")

    @property
    def poles(self) -> tuple[complex, ...]:
        return (self.a,)

    def __call__(self, x):
        return 1.0 / (np.asarray(x, dtype=complex) - self.a) ** self.k

    def label(self) -> str:
        return f"1/(x - ({self.a:g}))^{self.k}"


@dataclass(frozen=True)
class SphereKernel:
    """psi_z(x) = z(z-1) / (x(x-1)(x-z)), the integrable sphere kernel.

    Evaluated through its partial fractions
    (z-1)/x - z/(x-1) + 1/(x-z); the three coefficients sum to zero, which
    is what makes the kernel integrable at infinity.
    """

    z: complex

    def __post_init__(self) -> None:
        if abs(self.z) < 1e-12 or abs(self.z - 1.0) < 1e-12:
            raise ValueError("sphere kernel parameter must avoid {0, 1}")

    @property
    def poles(self) -> tuple[complex, ...]:
        return (0j, 1.0 + 0j, self.z)

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        z = self.z
        return (z - 1.0) / x - z / (x - 1.0) + 1.0 / (x - z)

    def label(self) -> str:
        return f"sphere kernel at {self.z:g}"


@dataclass(frozen=True)
class Custom:
    """Arbitrary evaluator; declare its poles so integrators can avoid them."""

    evaluator: Callable
    declared_poles: tuple[complex, ...] = ()

    @property
    def poles(self) -> tuple[complex, ...]:
        return self.declared_poles

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=complex))

    def label(self) -> str:
        return "custom"


TestFunction = CauchyPole | InversePower | SphereKernel | Custom


def test_functions(f: RationalMap) -> tuple[TestFunction, ...]:
    """The catalog attached to a map, keyed by its kind.

    Polynomial: a Cauchy pole at every finite critical value. Normalized
    rational: the same plus 1/(x-a)^k, k = 1..3, at a = f(inf). Sphere:
    one sphere kernel per finite critical value off the marked pair {0, 1}.
    """
    if f.kind is None:
        raise ConfigError(
            "map has no assigned kind; normalize it (or tag the file) first")
    values = f.critical_values
    if f.kind == "polynomial":
        return tuple(CauchyPole(v) for v in values)
    if f.kind == "rational":
        a = f.a_value
        cat: list[TestFunction] = [CauchyPole(v) for v in values]
        cat.extend(InversePower(a, k) for k in (1, 2, 3))
        return tuple(cat)
    kernels_list = [
        SphereKernel(v)
        for v in values
        if abs(v) > 1e-9 and abs(v - 1.0) > 1e-9
    ]
    return tuple(kernels_list)


# -- preimages and the operator ----------------------------------------------------


class PreimageBranch(NamedTuple):
    point: SpherePoint
    fprime: complex
    chart: str


def _infinity_branch(f: RationalMap) -> PreimageBranch:
    num_w, den_w = f._inverted
    return PreimageBranch(
        SpherePoint.infinity(), _chart_derivative(num_w, den_w), "w-z")


def preimages(f: RationalMap, x, *, tol: float = 1e-9) -> list[PreimageBranch]:
    """All d solutions of f(y) = x with their derivatives f'(y).

    Finite solutions come sorted by (re, im) with plane-chart derivatives;
    a solution at infinity (only when f(inf) = x) is appended with the
    w-chart derivative of w -> f(1/w) and must be skipped in plane sums.
    """
    xp = as_sphere(x)
    d = f.degree

    if xp.at_infinity:
        # preimages of inf are the poles of f, plus inf itself when deg num wins
        gap = f.num.degree - f.den.degree
        if gap >= 2:
            raise NearCriticalValue(
                "infinity is a critical value (critical fixed point)")
        out: list[PreimageBranch] = []
        if f.den.degree > 0:
            for root, mult in roots(f.den, tol):
                if mult > 1:
                    raise NearCriticalValue(
                        "infinity is a critical value (multiple pole)")
                # chart z -> w: derivative of 1/f at the pole
                nv = complex(f.num(root))
                dprime = complex(f.den.derivative()(root))
                out.append(PreimageBranch(
                    SpherePoint.finite(root), complex(dprime / nv), "z-w"))
        if gap == 1:
            num_w, den_w = f._inverted
            # w -> w chart: derivative of 1/f(1/w) at 0
            out.append(PreimageBranch(
                SpherePoint.infinity(), _chart_derivative(den_w, num_w), "w-w"))
        out.sort(key=_branch_key)
        return out

    xv = xp.value
    mr = multiplicity_radius(tol, abs(xv))
    for v in f.critical_values:
        if abs(xv - v) < mr:
            raise NearCriticalValue(
                f"query {xv:g} within merge radius of critical value {v:g}")

    p = f.num - f.den * xv
    # leading coefficients that cancel only numerically still mean f(inf) = x
    # to working precision: deflate and tag the branch at infinity
    cmax = float(np.max(np.abs(p.coeffs)))
    while p.degree > 0 and abs(p.coeffs[-1]) < 1e-13 * cmax:
        p = Poly(p.coeffs[:-1].copy())
    gap = d - p.degree
    branches: list[PreimageBranch] = []
    if gap >= 2:
        raise NearCriticalValue(
            "query is the critical value of the point at infinity")
    if gap == 1:
        branches.append(_infinity_branch(f))
    if p.degree > 0:
        for root, mult in roots(p, tol):
            if mult > 1:
                raise NearCriticalValue(
                    f"merged preimage branch at {root:g} (multiplicity {mult})")
            branches.append(PreimageBranch(
                SpherePoint.finite(root), complex(f.deriv_plane(root)), "plane"))
    branches.sort(key=_branch_key)
    return branches


def _branch_key(b: PreimageBranch):
    if b.point.at_infinity:
        return (1, 0.0, 0.0)
    return (0, b.point.value.real, b.point.value.imag)


def _chart_derivative(num_w: Poly, den_w: Poly) -> complex:
    n0 = num_w.coeffs[0] if num_w.coeffs.size else 0j
    n1 = num_w.coeffs[1] if num_w.coeffs.size > 1 else 0j
    d0 = den_w.coeffs[0] if den_w.coeffs.size else 0j
    d1 = den_w.coeffs[1] if den_w.coeffs.size > 1 else 0j
    return complex((n1 * d0 - n0 * d1) / (d0 * d0))


def transfer_apply(f: RationalMap, g: Callable, x, absolute: bool = False):
    """(T g)(x) = sum g(y)/f'(y)^2 over finite preimages; |T| drops phases."""
    branches = preimages(f, x)
    if absolute:
        total = 0.0
        for b in branches:
            if b.point.at_infinity:
                continue
            total += abs(complex(g(b.point.value))) / abs(b.fprime) ** 2
        return total
    acc = 0j
    for b in branches:
        if b.point.at_infinity:
            continue
        acc += complex(g(b.point.value)) / b.fprime**2
    return acc


# -- resolvents --------------------------------------------------------------------


@dataclass(frozen=True)
class ResolventControl:
    """Truncation and domain policy for resolvent evaluation."""

    tol: float = 1e-9
    max_depth: int = 24
    node_cap: int = 1 << 22
    exclusion_radius: float | None = None
    forbid_out_of_domain: bool = True
    cloud_horizon: int = 200


@dataclass(frozen=True)
class ResolventEval:
    value: complex
    abs_value: float
    depth_used: int
    tail_estimate: float
    in_domain: bool


def _domain_check(f: RationalMap, x: complex, ctrl: ResolventControl,
                  cloud: PostcriticalCloud | None) -> tuple[bool, PostcriticalCloud]:
    if cloud is None:
        cloud = postcritical_cloud(f, n_max=ctrl.cloud_horizon)
    radius = ctrl.exclusion_radius
    if radius is None:
        radius = cloud.exclusion_radius()
    in_domain = bool(cloud.min_distance(x) > radius)
    return in_domain, cloud


def resolvent(f: RationalMap, psi: Callable, x, ctrl: ResolventControl | None = None,
              cloud: PostcriticalCloud | None = None) -> ResolventEval:
    """r(x) = sum of (T^i psi)(x), with the absolute series as tail proxy.

    Stops when the last |T| layer drops below tol*(1 + abs_value), when
    three consecutive layers cancel structurally to machine zero (the
    series terminated), or at the depth/node budget. tail_estimate is the
    last absolute layer normalized by (1 + abs_value), so a certified stop
    reports tail_estimate below tol.
    """
    ctrl = ctrl or ResolventControl()
    xp = as_sphere(x)
    if xp.at_infinity:
        raise DomainViolation("resolvent queries must be finite")
    xv = xp.value
    in_domain, cloud = _domain_check(f, xv, ctrl, cloud)
    if not in_domain and ctrl.forbid_out_of_domain:
        raise DomainViolation(
            f"{xv:g} is within the exclusion radius of the postcritical cloud")

    cq = f.monic_quadratic_c()
    if cq is not None and isinstance(psi, CauchyPole):
        vals, absvals, depths, tails, status = kernels.quad_resolvent(
            cq, psi.v, np.array([xv]), ctrl.tol, ctrl.max_depth, ctrl.node_cap)
        if int(status[0]) == 3:
            raise NearCriticalValue(
                "a preimage layer reached the critical point (branches merge)")
        absv = float(absvals[0])
        return ResolventEval(complex(vals[0]), absv, int(depths[0]),
                             float(tails[0]) / (1.0 + absv), in_domain)

    return _resolvent_tree(f, psi, xv, ctrl, in_domain)


def _layer_solve(f: RationalMap, ys: np.ndarray, tol: float
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Preimages of every node in a layer: (B,) -> roots (B, d), fprime (B, d)."""
    d = f.degree
    nc = f.num.coeffs
    dc = f.den.coeffs
    width = max(nc.size, dc.size)
    rows = np.zeros((ys.size, width), dtype=complex)
    rows[:, : nc.size] = nc[None, :]
    rows[:, : dc.size] -= ys[:, None] * dc[None, :]

    lead_scale = np.max(np.abs(rows), axis=1)
    degenerate = np.abs(rows[:, -1]) < 1e-10 * lead_scale
    rts = np.empty((ys.size, d), dtype=complex)
    if (~degenerate).any():
        rts[~degenerate] = roots_batch(rows[~degenerate])
    for i in np.where(degenerate)[0]:
        # a node close to f(inf): fall back to the exact per-point path
        br = preimages(f, ys[i], tol=tol)
        fin = [b.point.value for b in br if not b.point.at_infinity]
        if len(fin) != d:
            raise NearCriticalValue(
                "a tree node pulled back through infinity; no plane-complete layer")
        rts[i] = np.array(fin, dtype=complex)

    # refine rows whose backward error is poor
    resid = _row_residual(rows, rts)
    bad = resid > 1e-10
    for i in np.where(bad)[0]:
        rr = roots(Poly(rows[i]), tol)
        flat: list[complex] = []
        for root, mult in rr:
            flat.extend([root] * mult)
        if len(flat) != d:
            raise NearCriticalValue("layer solve lost a branch")
        rts[i] = np.array(flat, dtype=complex)

    # merged-branch detection at the multiplicity radius
    if d > 1:
        dist = np.abs(rts[:, :, None] - rts[:, None, :])
        idx = np.arange(d)
        dist[:, idx, idx] = np.inf
        mr = multiplicity_radius(tol, 0.0) * (1.0 + np.abs(ys))
        if (dist.min(axis=(1, 2)) < mr).any():
            raise NearCriticalValue(
                "a preimage layer reached a critical value (branches merge)")

    order = np.lexsort((rts.imag, rts.real), axis=1)
    rts = np.take_along_axis(rts, order, axis=1)
    fp = f.deriv_plane(rts.reshape(-1)).reshape(rts.shape)
    return rts, fp


def _row_residual(rows: np.ndarray, rts: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(rts)
    for k in range(rows.shape[1] - 1, -1, -1):
        acc = acc * rts + rows[:, k][:, None]
    scale = np.sum(np.abs(rows), axis=1) * (1.0 + np.abs(rts).max(axis=1))
    return np.max(np.abs(acc), axis=1) / scale


def _resolvent_tree(f: RationalMap, psi: Callable, xv: complex,
                    ctrl: ResolventControl, in_domain: bool) -> ResolventEval:
    d = f.degree
    psi0 = complex(psi(xv))
    value = psi0
    abs_value = abs(psi0)
    tail = abs(psi0)
    depth_used = 0
    streak = 0

    ys = np.array([xv], dtype=complex)
    accs = np.ones(1, dtype=complex)
    nodes = 1
    for depth in range(1, ctrl.max_depth + 1):
        if nodes + ys.size * d > ctrl.node_cap:
            break
        rts, fp = _layer_solve(f, ys, ctrl.tol)
        child_acc = accs[:, None] * fp
        ys = rts.reshape(-1)
        accs = child_acc.reshape(-1)
        nodes += ys.size
        pv = np.asarray(psi(ys), dtype=complex)
        acc2 = accs * accs
        layer_val = complex(np.sum(pv / acc2))
        layer_abs = float(np.sum(np.abs(pv) / np.abs(acc2)))
        value += layer_val
        abs_value += layer_abs
        tail = layer_abs
        depth_used = depth
        if abs(layer_val) <= 1e-13 * (layer_abs + 1e-300):
            streak += 1
        else:
            streak = 0
        if layer_abs <= ctrl.tol * (1.0 + abs_value):
            break
        if streak >= 3:
            break
    return ResolventEval(value, abs_value, depth_used,
                         tail / (1.0 + abs_value), in_domain)


# -- quadratic-family Abel formula -------------------------------------------------


@dataclass(frozen=True)
class AbelEval:
    lam: float
    value: complex
    d_value: complex
    terms: int


def abel_resolvent_quadratic(c: complex, x: complex, lambdas,
                             horizon: int = 20000) -> list[AbelEval]:
    """Critical-orbit series for r(x) in the family z^2 + c.

    For each lambda in (0,1): D(lambda)^{-1} * sum_k lambda^k/(f^k)'(c) *
    1/(x - f^k(c)), with D(lambda) the same sum without the pole factor.
    Terms are accumulated until they fall to machine level relative to the
    partial sums.
    """
    c = complex(c)
    x = complex(x)
    lams = [float(v) for v in lambdas]
    for lam in lams:
        if not 0.0 < lam < 1.0:
            raise ValueError(f"lambda must lie in (0,1), got {lam}")

    # critical orbit of the critical value c with accumulated derivative,
    # extended on demand; once |acc| passes the overflow guard every later
    # coefficient is below machine level for any lambda < 1
    orbit: list[complex] = [c]
    derivs: list[complex] = [1.0 + 0j]
    state = {"z": c, "acc": 1.0 + 0j, "saturated": False}

    def extend(upto: int) -> None:
        while len(orbit) <= upto and not state["saturated"]:
            k = len(orbit)
            fprime = 2.0 * state["z"]
            acc = state["acc"] * fprime
            if acc == 0:
                raise ZeroOrbitDerivative(
                    f"(f^{k})'(c) = 0: the critical orbit returned to the "
                    "critical point")
            state["acc"] = acc
            state["z"] = state["z"] * state["z"] + c
            orbit.append(state["z"])
            derivs.append(acc)
            if abs(acc) > 1e280 or abs(state["z"]) > 1e150:
                state["saturated"] = True

    out: list[AbelEval] = []
    for lam in lams:
        total = 0j
        dsum = 0j
        lam_k = 1.0
        terms = 0
        converged = False
        for k in range(horizon + 1):
            extend(k)
            if k >= len(orbit):
                converged = True  # remaining terms are below machine level
                break
            coeff = lam_k / derivs[k]
            pole = x - orbit[k]
            if pole == 0:
                raise ZeroDivisionError(
                    f"x collides with the critical orbit point f^{k}(c)")
            term = coeff / pole
            total += term
            dsum += coeff
            terms = k + 1
            if k >= 2 and abs(term) <= 1e-17 * (1.0 + abs(total)) \
                    and abs(coeff) <= 1e-17 * (1.0 + abs(dsum)):
                converged = True
                break
            lam_k *= lam
        if not converged:
            raise SlowDecay(
                f"orbit series did not reach machine level within {horizon} terms")
        out.append(AbelEval(lam, total / dsum, dsum, terms))
    return out
