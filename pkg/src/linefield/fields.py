"""Line fields and their operators.

A line field is a measurable unit-modulus (or zero) function; the three
concrete variants are an analytic |q|/q field, a per-cell sampled field,
and a constant field. On top of them: the pushforward f*, the canonical
field sigma = |r|/r, the spread fields sigma_n, transform vectors, the
invariant field of a flexible degree-4 torus quotient, invariance
residuals, and the integral diagnostics table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    ConfigError,
    CriticalOrbit,
    CriticalPoint,
    DomainViolation,
    LinefieldError,
    NearCriticalValue,
    NotLattesLike,
    UnboundedSupport,
)
from .grid import Grid, MonteCarlo, PolarRefined, _mc_stats, _region_samples, integrate
from .poly import Poly
from .ratmap import RationalMap, postcritical_cloud
from .rng import complex_uniform, stream
from .transfer import CauchyPole, ResolventControl, _layer_solve, resolvent

__all__ = [
    "AnalyticField",
    "SampledField",
    "ConstantField",
    "LineField",
    "FVector",
    "save_sampled_field",
    "load_sampled_field",
    "pushforward_field",
    "sigma_field",
    "sigma_grid",
    "sigma_n_field",
    "f_vector",
    "lattes_field",
    "LattesResult",
    "invariance_residual",
    "integral_diagnostics",
    "DiagnosticsRow",
    "divergence_scan",
    "bounded_probe_field",
]

SIGMA_ZERO_THRESHOLD = 1e-10
CRITICAL_TOL = 1e-9


def _unit_or_zero(vals: np.ndarray, tol: float = 1e-12) -> bool:
    mod = np.abs(vals)
    return bool(np.all((mod <= tol) | (np.abs(mod - 1.0) <= tol)))


@dataclass(frozen=True)
class AnalyticField:
    """mu = |q|/q for a nonzero rational function q = q_num/q_den."""

    q_num: Poly
    q_den: Poly

    def __post_init__(self) -> None:
        if self.q_num.is_zero():
            raise ConfigError("analytic field needs a nonzero q")

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        # nonfinite inputs legitimately reach the evaluator and map to 0
        with np.errstate(invalid="ignore", over="ignore"):
            n = np.asarray(self.q_num(x), dtype=complex)
            d = np.asarray(self.q_den(x), dtype=complex)
            out = np.zeros(x.shape, dtype=complex)
            ok = np.isfinite(x.real) & np.isfinite(x.imag)
            ok &= (np.abs(n) > 0) & (np.abs(d) > 0)
            ok &= np.isfinite(n.real) & np.isfinite(n.imag)
            ok &= np.isfinite(d.real) & np.isfinite(d.imag)
            q = np.divide(n, d, out=np.ones_like(n), where=ok)
            out[ok] = (np.abs(q) / q)[ok]
        return out

    @property
    def compact_support(self) -> bool:
        return False

    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class SampledField:
    """Per-cell values (unit modulus or 0); identically zero off the grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(np.asarray(self.values, dtype=complex))
        n = self.grid.resolution
        if v.shape != (n, n):
            raise ConfigError(f"values shape {v.shape} != ({n}, {n})")
        if not _unit_or_zero(v):
            raise ConfigError("sampled field values must have modulus 1 or 0")
        object.__setattr__(self, "values", v)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        idx = self.grid.cell_of(x)
        out = np.zeros(x.shape, dtype=complex)
        ok = idx >= 0
        out[ok] = self.values.reshape(-1)[idx[ok]]
        return out

    @property
    def compact_support(self) -> bool:
        return True

    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0))


@dataclass(frozen=True)
class ConstantField:
    """A constant unit value, or the zero field."""

    t: complex

    def __post_init__(self) -> None:
        if abs(self.t) > 1e-12 and abs(abs(self.t) - 1.0) > 1e-12:
            raise ConfigError("constant field value must have modulus 1 or 0")

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return np.full(x.shape, self.t, dtype=complex)

    @property
    def compact_support(self) -> bool:
        return abs(self.t) == 0

    def is_zero(self) -> bool:
        return abs(self.t) == 0


LineField = AnalyticField | SampledField | ConstantField


def save_sampled_field(field: SampledField, path) -> None:
    np.savez(path, box=np.asarray(field.grid.box_tuple()),
             resolution=field.grid.resolution, values=field.values)


def load_sampled_field(path) -> SampledField:
    with np.load(path) as data:
        box = data["box"]
        res = int(data["resolution"])
        values = np.asarray(data["values"], dtype=complex)
    grid = Grid(complex(box[0], box[1]), complex(box[2], box[3]), res)
    return SampledField(grid, values)


@dataclass(frozen=True)
class FVector:
    """Transform components of a field with their MC standard errors."""

    components: tuple[complex, ...]
    stderrs: tuple[float, ...]
    kind: str

    def __post_init__(self) -> None:
        if len(self.components) != len(self.stderrs):
            raise ConfigError("components and stderrs lengths differ")


def pushforward_field(f: RationalMap, nu, x):
    """(f* nu)(x) = nu(f(x)) |f'(x)|^2 / f'(x)^2; unit modulus is preserved.

    Vectorized over x. CriticalPoint where |f'(x)| <= 1e-9.
    """
    x = np.asarray(x, dtype=complex)
    fp = np.asarray(f.deriv_plane(x), dtype=complex)
    if np.any(np.abs(fp) <= CRITICAL_TOL):
        raise CriticalPoint("pushforward evaluated at a critical point")
    fx = np.asarray(f.eval_plane(x), dtype=complex)
    vals = np.asarray(nu.evaluate(fx), dtype=complex)
    out = vals * (np.conj(fp) / fp)
    return out if out.shape else complex(out)


def _resolvent_batch(f: RationalMap, psi, xs: np.ndarray,
                     ctrl: ResolventControl):
    """(values, abs_values, ok) at many points; quadratic maps go through
    the compiled tree kernel, everything else through per-point evaluation."""
    xs = np.asarray(xs, dtype=complex)
    c = f.monic_quadratic_c()
    if c is not None and isinstance(psi, CauchyPole):
        values, absvals, _, _, status = kernels.quad_resolvent(
            c, psi.v, xs, ctrl.tol, ctrl.max_depth, ctrl.node_cap)
        ok = status != 3
        return values, absvals, ok
    values = np.zeros(xs.shape, dtype=complex)
    absvals = np.zeros(xs.shape, dtype=np.float64)
    ok = np.zeros(xs.shape, dtype=bool)
    flat = xs.reshape(-1)
    vf = values.reshape(-1)
    af = absvals.reshape(-1)
    of = ok.reshape(-1)
    for i, xv in enumerate(flat):
        try:
            ev = resolvent(f, psi, complex(xv), ctrl)
        except (DomainViolation, NearCriticalValue, LinefieldError):
            continue
        vf[i] = ev.value
        af[i] = ev.abs_value
        of[i] = True
    return values, absvals, ok


def _phase(values: np.ndarray, absvals: np.ndarray) -> np.ndarray:
    """|r|/r with the zero-threshold convention."""
    out = np.zeros(values.shape, dtype=complex)
    nz = np.abs(values) >= SIGMA_ZERO_THRESHOLD * (1.0 + absvals)
    out[nz] = np.abs(values[nz]) / values[nz]
    return out


def sigma_field(f: RationalMap, psi, x, ctrl: ResolventControl | None = None,
                cloud=None) -> complex:
    """sigma(x) = |r_psi(x)| / r_psi(x); 0 when |r| is below threshold."""
    ctrl = ctrl or ResolventControl()
    ev = resolvent(f, psi, x, ctrl, cloud=cloud)
    if abs(ev.value) < SIGMA_ZERO_THRESHOLD * (1.0 + ev.abs_value):
        return 0j
    return abs(ev.value) / ev.value


def sigma_grid(f: RationalMap, psi, grid: Grid,
               ctrl: ResolventControl | None = None) -> np.ndarray:
    """sigma at every cell center as a (res, res) array.

    Centers inside the postcritical exclusion radius, failed evaluations,
    and below-threshold values all come out 0, so the result drops straight
    into a segment render or a SampledField.
    """
    ctrl = ctrl or ResolventControl()
    cloud = postcritical_cloud(f, n_max=ctrl.cloud_horizon)
    radius = ctrl.exclusion_radius
    if radius is None:
        radius = cloud.exclusion_radius()
    xs = grid.centers()
    good = np.asarray(cloud.min_distance(xs) > radius)
    out = np.zeros(xs.shape, dtype=complex)
    if good.any():
        vals, absv, ok = _resolvent_batch(f, psi, xs[good], ctrl)
        sig = _phase(vals, absv)
        sig[~ok] = 0
        out[good] = sig
    n = grid.resolution
    return out.reshape(n, n)


def sigma_n_field(f: RationalMap, psi, fs, x, depth: int,
                  ctrl: ResolventControl | None = None) -> complex:
    """The spread field: sigma on the Kprime cells, its pushforward
    transport where the orbit first enters them within `depth` steps,
    and 0 otherwise."""
    if depth < 0:
        raise ConfigError("depth must be >= 0")
    ctrl = ctrl or ResolventControl()
    z = complex(x)
    w = 1.0 + 0j
    for _ in range(depth + 1):
        if fs.Kprime.contains([z])[0]:
            sig = sigma_field(f, psi, z, ctrl)
            if sig == 0:
                return 0j
            return complex(sig * np.conj(w) / w)
        fp = complex(f.deriv_plane(z))
        if abs(fp) <= CRITICAL_TOL:
            raise CriticalOrbit(f"orbit of {x:g} passes a critical point")
        w *= fp
        z = complex(f.eval_plane(z))
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            return 0j
    return 0j


def _sphere_psi(z: complex, x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return (z - 1.0) / x - z / (x - 1.0) + 1.0 / (x - z)


def f_vector(nu, f: RationalMap, *, n: int = 20000, seed: int = 0) -> FVector:
    """Transform components of nu: Cauchy-kernel values at the critical
    values (plus the three infinity components for normalized rational
    maps), or the integrable-kernel values for sphere maps."""
    if f.kind is None:
        raise ConfigError("f_vector needs a classified map kind")
    values = list(f.critical_values)

    if nu.is_zero():
        p = len(values) + (3 if f.kind == "rational" else 0)
        return FVector((0j,) * p, (0.0,) * p, f.kind)

    if nu.compact_support:
        region = nu.grid.full_region() if isinstance(nu, SampledField) else None
        if region is None:
            raise UnboundedSupport("no sampling region for this field")
    elif f.kind == "sphere":
        # integrable kernel decays cubically; fixed large box plus a tail
        # bound folded into the stderr
        region = Grid.square(0j, 50.0, 64).full_region()
    else:
        raise UnboundedSupport(
            "Cauchy-kernel transforms need a compactly supported field")

    comps: list[complex] = []
    errs: list[float] = []

    def add(fn, poles, extra_err=0.0, sub=0):
        val, err = integrate(fn, region,
                             PolarRefined(n, seed + 1000 * sub, tuple(poles)))
        comps.append(val)
        errs.append(err + extra_err)

    if f.kind == "sphere":
        R = 50.0
        for k, v in enumerate(values):
            tail = 2 * np.pi * abs(v * (v - 1.0)) / R if not nu.compact_support else 0.0
            add(lambda x, v=v: np.asarray(nu.evaluate(x)) * _sphere_psi(v, x),
                (0j, 1 + 0j, v), tail, sub=k)
        return FVector(tuple(comps), tuple(errs), f.kind)

    for k, v in enumerate(values):
        add(lambda x, v=v: np.asarray(nu.evaluate(x)) / (v - np.asarray(x)),
            (v,), sub=k)
    if f.kind == "rational":
        a = f.a_value
        add(lambda x: np.asarray(nu.evaluate(x)) / (a - np.asarray(x)),
            (a,), sub=101)
        add(lambda x: -np.asarray(nu.evaluate(x)) / (a - np.asarray(x)) ** 2,
            (a,), sub=102)
        add(lambda x: 2.0 * np.asarray(nu.evaluate(x)) / (a - np.asarray(x)) ** 3,
            (a,), sub=103)
    return FVector(tuple(comps), tuple(errs), f.kind)


@dataclass(frozen=True)
class LattesResult:
    mu: AnalyticField
    lam: float
    residual: float


def lattes_field(f: RationalMap) -> LattesResult:
    """The invariant field |q|/q with q = 1/prod(z - p_i) over the three
    finite postcritical points, plus the multiplier of q under f."""
    cloud = postcritical_cloud(f)
    finite = cloud.all_finite()
    if finite.size != 3:
        raise NotLattesLike(
            f"need exactly 3 finite postcritical points, found {finite.size}")
    den = Poly.from_roots(list(finite))
    mu = AnalyticField(Poly([1.0]), den)

    # ratio q(f(z)) f'(z)^2 / q(z) = den(z) f'(z)^2 / den(f(z))
    rng = stream(7, 53)
    scale = max(1.0, cloud.bbox_diameter())
    lo = complex(-1.5 * scale - 1, -1.5 * scale - 1)
    hi = complex(1.5 * scale + 1, 1.5 * scale + 1)
    ratios: list[complex] = []
    tries = 0
    while len(ratios) < 100 and tries < 5000:
        tries += 1
        z = complex(complex_uniform(rng, lo, hi, 1)[0])
        dz = complex(den(z))
        fp = complex(f.deriv_plane(z))
        if abs(dz) < 1e-6 or abs(fp) < 1e-6:
            continue
        fz = complex(f.eval_plane(z))
        if not (math.isfinite(fz.real) and math.isfinite(fz.imag)):
            continue
        dfz = complex(den(fz))
        if abs(dfz) < 1e-6:
            continue
        ratios.append(dz * fp * fp / dfz)
    if len(ratios) < 100:
        raise NotLattesLike("could not collect admissible multiplier samples")
    arr = np.asarray(ratios)
    lam_c = complex(np.median(arr.real), np.median(arr.imag))
    residual = float(np.max(np.abs(arr - lam_c)))
    if abs(lam_c.imag) > 1e-8 * (1 + abs(lam_c)) or lam_c.real <= 0:
        raise NotLattesLike(f"multiplier {lam_c:g} is not real-positive")
    if residual > 1e-6 * (1 + abs(lam_c)):
        raise NotLattesLike(f"multiplier spread {residual:.3e} too large")
    return LattesResult(mu, float(lam_c.real), residual)


POLISH_FLOOR = 1e-6


def _residual_batch(f: RationalMap, mu, xs: np.ndarray) -> np.ndarray:
    """|f*mu - mu| per point, -1 where the point is inadmissible."""
    xs = np.asarray(xs, dtype=complex)
    out = np.full(xs.shape, -1.0)
    fp = np.asarray(f.deriv_plane(xs), dtype=complex)
    ok = np.isfinite(fp.real) & np.isfinite(fp.imag)
    ok &= np.abs(fp) > CRITICAL_TOL
    if not ok.any():
        return out
    fx = np.asarray(f.eval_plane(xs[ok]), dtype=complex)
    push = np.asarray(mu.evaluate(fx), dtype=complex) * (np.conj(fp[ok]) / fp[ok])
    base = np.asarray(mu.evaluate(xs[ok]), dtype=complex)
    out[ok] = np.abs(push - base)
    return out


def invariance_residual(f: RationalMap, mu, samples: int,
                        seed: int = 0) -> tuple[float, float]:
    """(max, mean) of |f*mu(x) - mu(x)| over admissible random samples.

    The residual is a continuous function whose supremum random sampling
    undershoots by O(1/sqrt(samples)), so the max is sharpened afterwards
    by a shrinking local search around the argmax. When every sample sits
    at the rounding floor there is no signal to climb and the search is
    skipped, leaving the sampled max.
    """
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    cloud = postcritical_cloud(f)
    scale = max(1.0, cloud.bbox_diameter())
    lo = complex(-1.5 * scale - 1, -1.5 * scale - 1)
    hi = complex(1.5 * scale + 1, 1.5 * scale + 1)
    rng = stream(seed, 61)
    pts: list[complex] = []
    res: list[float] = []
    tries = 0
    while len(res) < samples and tries < 60 * samples:
        need = samples - len(res)
        batch = complex_uniform(rng, lo, hi, need)
        tries += need
        rr = _residual_batch(f, mu, batch)
        good = rr >= 0
        pts.extend(batch[good].tolist())
        res.extend(rr[good].tolist())
    if not res:
        raise LinefieldError("no admissible samples for invariance residual")
    res_arr = np.asarray(res[:samples])
    best_i = int(np.argmax(res_arr))
    best = float(res_arr[best_i])
    mean = float(np.mean(res_arr))
    if best < POLISH_FLOOR:
        return best, mean

    bx = complex(pts[best_i])
    rho = 0.05 * (hi.real - lo.real)
    for _ in range(60):
        u = np.sqrt(rng.random(64))
        th = 2 * np.pi * rng.random(64)
        cand = bx + rho * u * np.exp(1j * th)
        rr = _residual_batch(f, mu, cand)
        k = int(np.argmax(rr))
        if rr[k] > best:
            best = float(rr[k])
            bx = complex(cand[k])
        rho *= 0.65
    return best, mean


# -- integral diagnostics ------------------------------------------------------------


@dataclass(frozen=True)
class DiagnosticsRow:
    n: int
    int_abs_r: float
    int_sigma_psi: complex
    stderr: float
    depth: int
    tail_bound: float = 0.0
    int_r_mu: complex | None = None


def _transfer_pow_batch(f: RationalMap, psi, ys: np.ndarray, depth: int,
                        tol: float = 1e-9,
                        node_budget: int = 1 << 22) -> np.ndarray:
    """(T^i psi)(y) for i = 0..depth as a (B, depth+1) matrix.

    Full preimage-tree enumeration one level at a time: the monic quadratic
    family through the closed sqrt branches, everything else through batched
    polynomial root finding. The budget guards the d^depth node blowup.
    """
    ys = np.asarray(ys, dtype=complex).reshape(-1)
    B = ys.size
    out = np.empty((B, depth + 1), dtype=complex)
    out[:, 0] = np.asarray(psi(ys), dtype=complex)
    if depth == 0:
        return out
    d = f.degree
    if B * d ** depth > node_budget:
        raise ConfigError(
            f"preimage tree needs {B * d ** depth} nodes (budget "
            f"{node_budget}); reduce the depth or the sample count")

    c = f.monic_quadratic_c()
    nodes = ys[:, None]
    acc = np.ones((B, 1), dtype=complex)
    for i in range(1, depth + 1):
        if c is not None:
            s = np.sqrt(nodes - c)
            if np.any(np.abs(s) < 5e-8 * (1.0 + np.abs(nodes))):
                raise NearCriticalValue(
                    "a preimage layer reached the critical point "
                    "(branches merge)")
            nodes = np.concatenate([s, -s], axis=1)
            acc = np.concatenate([acc, acc], axis=1) * (2.0 * nodes)
        else:
            rts, fp = _layer_solve(f, nodes.reshape(-1), tol)
            w = nodes.shape[1]
            nodes = rts.reshape(B, w * d)
            acc = np.repeat(acc, d, axis=1) * fp.reshape(B, w * d)
        pv = np.asarray(psi(nodes.reshape(-1)),
                        dtype=complex).reshape(nodes.shape)
        out[:, i] = np.sum(pv / (acc * acc), axis=1)
    return out


def _geometric_tail(terms: np.ndarray) -> float:
    """Bound on the dropped i > depth terms from the last two computed ones."""
    if terms.size < 2:
        return 0.0
    last, prev = abs(terms[-1]), abs(terms[-2])
    if last == 0.0:
        return 0.0
    ratio = min(last / prev, 0.95) if prev > 0 else 0.95
    return float(last * ratio / (1.0 - ratio))


def integral_diagnostics(f: RationalMap, psi, fs_sequence, depth: int, *,
                         mc_n: int = 20000, seed: int = 0, mu=None,
                         ctrl: ResolventControl | None = None) -> list[DiagnosticsRow]:
    """Per fundamental set: LHS = integral of |r| over Kprime; RHS = the
    sum over i <= depth of the sigma_i * psi integrals, each evaluated on
    the Kprime side of its change of variables as sigma * (T^i psi) with
    the transfer powers enumerated exactly over the preimage tree.

    One sample batch feeds both columns, so their difference carries the
    truncation error rather than independent sampling noise; the reported
    stderr is the conservative quadrature of both columns' errors, and
    tail_bound is a geometric extrapolation of the dropped depth tail
    (0 when depth < 1 leaves nothing to extrapolate from).

    Points inside the postcritical exclusion radius are zeroed on both
    sides, so both columns estimate the same trimmed quantity.
    """
    if not fs_sequence:
        raise ConfigError("fs_sequence must be nonempty")
    if depth < 0:
        raise ConfigError("depth must be >= 0")
    ctrl = ctrl or ResolventControl(tol=1e-8)
    cloud = postcritical_cloud(f)
    radius = cloud.exclusion_radius()
    rows: list[DiagnosticsRow] = []

    for n_idx, fs in enumerate(fs_sequence):
        if fs.Kprime.is_empty():
            rows.append(DiagnosticsRow(n_idx, 0.0, 0j, 0.0, depth, 0.0,
                                       0j if mu is not None else None))
            continue

        rng = stream(seed + 17 * n_idx, 47)
        ys = _region_samples(fs.Kprime, rng, mc_n)
        good = np.asarray(cloud.min_distance(ys) >= radius)
        area = fs.Kprime.area

        rvals = np.zeros(mc_n, dtype=complex)
        sig = np.zeros(mc_n, dtype=complex)
        tpow = np.zeros((mc_n, depth + 1), dtype=complex)
        if good.any():
            vals, absv, ok = _resolvent_batch(f, psi, ys[good], ctrl)
            vals = vals.copy()
            vals[~ok] = 0
            rvals[good] = vals
            s = _phase(vals, absv)
            s[~ok] = 0
            sig[good] = s
            tpow[good] = _transfer_pow_batch(f, psi, ys[good], depth)

        lhs, err_l = _mc_stats(np.abs(rvals), area)
        term_vals = sig[:, None] * tpow
        rhs, err_r = _mc_stats(term_vals.sum(axis=1), area)
        terms = term_vals.mean(axis=0) * area
        err = float(np.sqrt(err_l ** 2 + err_r ** 2))

        r_mu = None
        if mu is not None:
            muv = np.asarray(mu.evaluate(ys), dtype=complex)
            r_mu, _ = _mc_stats(rvals * muv, area)

        rows.append(DiagnosticsRow(n_idx, float(lhs.real), complex(rhs), err,
                                   depth, _geometric_tail(terms), r_mu))
    return rows


def divergence_scan(f: RationalMap, psi, grid: Grid, deltas, *,
                    mc_n: int = 20000, seed: int = 0,
                    ctrl: ResolventControl | None = None) -> list[tuple[float, float, float]]:
    """Integral of |r| over the box minus shrinking postcritical
    neighborhoods: rows (delta, value, stderr)."""
    ctrl = ctrl or ResolventControl(tol=1e-8)
    cloud = postcritical_cloud(f)
    region = grid.full_region()
    out: list[tuple[float, float, float]] = []
    for k, delta in enumerate(deltas):
        if delta <= 0:
            raise ConfigError("deltas must be positive")

        def g(x, d=delta):
            x = np.asarray(x, dtype=complex)
            good = np.asarray(cloud.min_distance(x) >= d)
            vals = np.zeros(x.shape, dtype=np.float64)
            if good.any():
                vv, _, ok = _resolvent_batch(f, psi, x[good], ctrl)
                va = np.abs(vv)
                va[~ok] = 0.0
                vals[good] = va
            return vals

        est, err = integrate(g, region, MonteCarlo(mc_n, seed))
        out.append((float(delta), float(est.real), err))
    return out


def bounded_probe_field(f: RationalMap):
    """A deterministic compactly supported unit field for integral probes.

    Returns (field, support_box, outer_box) where outer_box is certified by
    ring sampling to contain the preimage of the support box.
    """
    cloud = postcritical_cloud(f)
    finite = cloud.all_finite()
    center = complex(np.mean(finite)) if finite.size else 0j
    h = max(1.0, 0.6 * cloud.bbox_diameter())
    vinf = f.value_at_infinity()
    if not vinf.at_infinity and abs(vinf.value - center) <= 1.6 * h:
        step = center - vinf.value
        step = step / abs(step) if abs(step) > 1e-9 else 1.0 + 0j
        center = vinf.value + 2.6 * h * step

    sgrid = Grid.square(center, h, 64)
    cc = sgrid.centers()
    phase = np.exp(2j * np.pi * ((cc.real - center.real)
                                 + 0.7 * (cc.imag - center.imag)) / h)
    vals = np.where(np.abs(cc - center) <= 0.9 * h, phase, 0j)
    nu = SampledField(sgrid, vals.reshape(64, 64))

    support_box = (sgrid.lo, sgrid.hi)
    R = 2.0 * (h + abs(center) + 1.0)
    theta = 2 * np.pi * np.arange(256) / 256
    for _ in range(12):
        clear = True
        for radius in (R, 1.37 * R, 1.83 * R):
            ring = radius * np.exp(1j * theta)
            img = np.asarray(f.eval_plane(ring), dtype=complex)
            bad = (np.abs(img.real - center.real) <= 1.1 * h) \
                & (np.abs(img.imag - center.imag) <= 1.1 * h)
            bad &= np.isfinite(img.real) & np.isfinite(img.imag)
            if bad.any():
                clear = False
                break
        if clear:
            break
        R *= 2.0
    else:
        raise UnboundedSupport("no bounded preimage box found for the probe")
    outer = Grid.square(0j, R, 8)
    return nu, support_box, (outer.lo, outer.hi)
