"""Residue data L_j(z), the infinity term I(z,x), and identity verification.

The operator identity for the Cauchy kernel reads, at valid (z, x),

    T(1/(z-.))(x) = 1/(f'(z)(f(z)-x)) + sum_j L_j(z)/(x-v_j) - I(z,x),

with I = 0 for polynomials; the sphere-kernel version replaces each Cauchy
pole with the integrable kernel psi and drops the infinity term. L_j and I
are evaluated by trapezoidal contour quadrature, which is spectrally
accurate on circles.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    CriticalZ,
    ProbeMismatch,
    RadiusInstability,
)
from .errors import LinefieldError
from .poly import multiplicity_radius
from .ratmap import RationalMap, postcritical_cloud
from .rng import complex_uniform, stream
from .transfer import (
    ResolventControl,
    SphereKernel,
    resolvent,
    test_functions,
    transfer_apply,
)

__all__ = [
    "ResidueData",
    "VerificationReport",
    "l_coefficients",
    "i_infinity",
    "verify_identity",
    "IDENTITIES",
]

CONTOUR_NODES = 512
EPS_CAP = 0.1
PROBE_TOL = 1e-9

IDENTITIES = ("lemma_T", "lemma_Tc", "resolvent_eq", "duality",
              "cauchy_functional_eq")
_IDENTITY_CODE = {name: i for i, name in enumerate(IDENTITIES)}


@dataclass(frozen=True)
class ResidueData:
    """L_j(z) keyed by critical value, with the probe-consistency verdict.

    probes_agree is True when every extraction matched at the initial
    contour radius; False means a radius shrink was needed (the value is
    still certified, or ProbeMismatch would have been raised). i_term is
    the infinity integral at (z, first probe); it is zero for polynomials
    and for sphere-kind maps, where the contour at infinity vanishes.
    """

    L: dict
    i_term: complex
    probes_agree: bool


@dataclass(frozen=True)
class VerificationReport:
    identity_name: str
    sample_count: int
    max_residual: float
    mean_residual: float
    tol: float
    passed: bool
    worst_sample: tuple[complex, complex]

    def as_dict(self) -> dict:
        return {
            "identity_name": self.identity_name,
            "sample_count": self.sample_count,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tol": self.tol,
            "pass": self.passed,
            "worst_sample": [
                [self.worst_sample[0].real, self.worst_sample[0].imag],
                [self.worst_sample[1].real, self.worst_sample[1].imag],
            ],
        }


def _contour_mean(fn, center: complex, radius: float, nodes: int) -> complex:
    """(1/2pi i) times the contour integral of fn over |w-center| = radius."""
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    w = center + radius * np.exp(1j * theta)
    vals = fn(w) * (w - center)
    return complex(np.sum(vals) / nodes)


def _coefficient_scale(f: RationalMap) -> float:
    return float(max(1.0, np.max(np.abs(f.num.coeffs)),
                     np.max(np.abs(f.den.coeffs))))


def _sphere_psi(z: complex, x) -> complex:
    x = np.asarray(x, dtype=complex)
    return (z - 1.0) / x - z / (x - 1.0) + 1.0 / (x - z)


def l_coefficients(f: RationalMap, z: complex, kernel: str = "cauchy", *,
                   nodes: int = CONTOUR_NODES) -> ResidueData:
    """Extract L_j(z) from small contours around the critical points.

    For the Cauchy kernel each critical contour integral factors as
    L_c(z)/(x - f(c)); for the sphere kernel as L_c(z) * psi_{f(c)}(x).
    Either way L_c is recovered by dividing out the x-dependence at a probe
    point, and certified by agreement at a second probe.
    """
    if kernel not in ("cauchy", "sphere"):
        raise ValueError(f"kernel must be 'cauchy' or 'sphere', got {kernel!r}")
    z = complex(z)
    if kernel == "sphere" and (abs(z) < 1e-9 or abs(z - 1.0) < 1e-9):
        raise CriticalZ("sphere kernel parameter z must avoid {0, 1}")

    crits = [(c, m) for c, m in f.critical_points]
    if f.den.degree > 0:
        from .poly import roots

        pole_pts = [r for r, _ in roots(f.den)]
    else:
        pole_pts = []

    # fixed pseudo-random probes at distance >= 1 from every critical value
    values = list(f.critical_values)
    rng = stream(90210, 11)
    probes: list[complex] = []
    center = complex(np.mean(values)) if values else 0j
    spread = 2.0 + max((abs(v - center) for v in values), default=0.0)
    while len(probes) < 2:
        cand = center + complex_uniform(rng, -spread - 2j * spread,
                                        spread + 2j * spread, 1)[0]
        if all(abs(cand - v) >= 1.0 for v in values) and abs(cand) > 0.5 \
                and abs(cand - 1.0) > 0.5:
            probes.append(complex(cand))
    x1, x2 = probes

    per_crit: list[tuple[complex, complex]] = []
    agree = True
    for c, mult in crits:
        others = [abs(c - c2) for c2, _ in crits if c2 is not c] + \
                 [abs(c - p) for p in pole_pts]
        eps = min(EPS_CAP, 0.5 * min(others)) if others else EPS_CAP
        if abs(z - c) < max(eps, multiplicity_radius(1e-9, abs(c))):
            raise CriticalZ(
                f"z = {z:g} is within the contour radius of critical point {c:g}")
        v = complex(f.eval_plane(c))

        def ic(x_val: complex, radius: float) -> complex:
            if kernel == "cauchy":
                def fn(w):
                    return 1.0 / (f.deriv_plane(w) * (f.eval_plane(w) - x_val)
                                  * (w - z))
            else:
                def fn(w):
                    return (_sphere_psi(f.eval_plane(w), x_val)
                            * _sphere_psi(z, w) / f.deriv_plane(w))
            return _contour_mean(fn, c, radius, nodes)

        def extract(x_val: complex, radius: float) -> complex:
            val = ic(x_val, radius)
            if kernel == "cauchy":
                return val * (x_val - v)
            div = complex(_sphere_psi(v, x_val))
            return val / div

        lc = None
        radius = eps
        for attempt in range(5):
            l1 = extract(x1, radius)
            l2 = extract(x2, radius)
            if abs(l1 - l2) <= PROBE_TOL * (1.0 + abs(l1)):
                lc = l1
                if attempt > 0:
                    agree = False
                break
            radius *= 0.5
            if abs(z - c) < radius:
                break
        if lc is None:
            raise ProbeMismatch(
                f"L extraction at critical point {c:g} disagrees between probes "
                f"({abs(l1 - l2):.3e})")
        per_crit.append((v, lc))

    table: dict = {}
    for v_j in f.critical_values:
        if kernel == "sphere" and (abs(v_j) < 1e-9 or abs(v_j - 1.0) < 1e-9):
            # psi at a marked point is the zero function; the group drops out
            continue
        acc = 0j
        for v, lc in per_crit:
            if abs(v - v_j) <= 1e-8 * (1.0 + abs(v_j)):
                acc += lc
        table[v_j] = acc

    i_term = 0j
    if f.kind == "rational":
        i_term = i_infinity(f, z, x1, nodes=nodes)
    return ResidueData(table, i_term, agree)


def i_infinity(f: RationalMap, z: complex, x: complex, *,
               nodes: int = CONTOUR_NODES, rtol: float = 1e-8,
               radius: float | None = None) -> complex:
    """The big-contour integral of 1/(f'(w)(f(w)-x)(w-z)).

    Zero for polynomials. The radius is far outside every pole of the
    integrand and the value is certified stable between R and 2R. Pass
    radius to fix R explicitly; it must still enclose all poles.
    """
    z = complex(z)
    x = complex(x)
    R = radius if radius is not None else \
        10.0 * (1.0 + max(abs(z), abs(x), _coefficient_scale(f)))

    def fn(w):
        return 1.0 / (f.deriv_plane(w) * (f.eval_plane(w) - x) * (w - z))

    v1 = _contour_mean(fn, 0j, R, nodes)
    v2 = _contour_mean(fn, 0j, 2.0 * R, nodes)
    if abs(v1 - v2) > rtol * (1.0 + abs(v1)):
        raise RadiusInstability(
            f"infinity integral differs between radii {R:g} and {2*R:g}: "
            f"{abs(v1 - v2):.3e}")
    return v1


# -- identity verification ----------------------------------------------------------


def _sample_guarded(rng, lo: complex, hi: complex, bad: list[complex],
                    min_dist: float, tries: int = 200) -> complex:
    for _ in range(tries):
        cand = complex(complex_uniform(rng, lo, hi, 1)[0])
        if all(abs(cand - b) >= min_dist for b in bad):
            return cand
    raise LinefieldError("sampling failed to clear the guard set")


def _residual_lemma_T(f: RationalMap, rng, nodes: int) -> tuple[float, complex, complex]:
    cloud = postcritical_cloud(f)
    scale = max(1.0, cloud.bbox_diameter())
    lo = complex(-1.5 * scale - 1, -1.5 * scale - 1)
    hi = complex(1.5 * scale + 1, 1.5 * scale + 1)
    gap = 1e-3 * scale
    crit_pts = [c for c, _ in f.critical_points]
    values = list(f.critical_values)
    avals = [f.a_value] if f.kind == "rational" else []

    z = _sample_guarded(rng, lo, hi, crit_pts, 10.0 * gap)
    fz = complex(f.eval_plane(z))
    x = _sample_guarded(rng, lo, hi, values + avals + [fz, z], gap)

    lhs = transfer_apply(f, lambda y: 1.0 / (z - y), x)
    data = l_coefficients(f, z, "cauchy", nodes=nodes)
    rhs = 1.0 / (complex(f.deriv_plane(z)) * (fz - x))
    for v_j, l_j in data.L.items():
        rhs += l_j / (x - v_j)
    if f.kind == "rational":
        rhs -= i_infinity(f, z, x, nodes=nodes)
    resid = abs(lhs - rhs) / (1.0 + abs(lhs) + abs(rhs))
    return resid, z, x


def _residual_lemma_Tc(f: RationalMap, rng, nodes: int) -> tuple[float, complex, complex]:
    if f.kind != "sphere":
        raise ConfigError("lemma_Tc needs a sphere-normalized map")
    cloud = postcritical_cloud(f)
    pts = list(cloud.all_finite())
    scale = max(1.0, cloud.bbox_diameter())
    lo = complex(-1.5 * scale - 1, -1.5 * scale - 1)
    hi = complex(1.5 * scale + 1, 1.5 * scale + 1)
    gap = 1e-3 * scale
    crit_pts = [c for c, _ in f.critical_points]

    z = _sample_guarded(rng, lo, hi, crit_pts + [0j, 1 + 0j], 10.0 * gap)
    fz = complex(f.eval_plane(z))
    if abs(fz) < 10 * gap or abs(fz - 1.0) < 10 * gap:
        raise CriticalZ("f(z) landed on a marked point; resample")
    x = _sample_guarded(rng, lo, hi, pts + [0j, 1 + 0j, fz, z], gap)

    lhs = transfer_apply(f, SphereKernel(z), x)
    data = l_coefficients(f, z, "sphere", nodes=nodes)
    rhs = complex(_sphere_psi(fz, x)) / complex(f.deriv_plane(z))
    for v_j, l_j in data.L.items():
        rhs += l_j * complex(_sphere_psi(v_j, x))
    resid = abs(lhs - rhs) / (1.0 + abs(lhs) + abs(rhs))
    return resid, z, x


def _residual_resolvent_eq(f: RationalMap, rng, nodes: int,
                           ctrl: ResolventControl) -> tuple[float, complex, complex]:
    cloud = postcritical_cloud(f)
    pts = list(cloud.all_finite())
    scale = max(1.0, cloud.bbox_diameter())
    lo = complex(-1.0 * scale - 1, -1.0 * scale - 1)
    hi = complex(1.0 * scale + 1, 1.0 * scale + 1)
    radius = cloud.exclusion_radius()

    cat = test_functions(f)
    if not cat:
        raise ConfigError("empty test-function catalog")
    psi = cat[int(rng.integers(len(cat)))]
    x = _sample_guarded(rng, lo, hi, pts, 2.0 * radius)

    r_x = resolvent(f, psi, x, ctrl, cloud=cloud)

    def r_eval(y):
        y = np.asarray(y, dtype=complex)
        out = np.empty(y.shape, dtype=complex)
        for idx in np.ndindex(y.shape):
            out[idx] = resolvent(f, psi, complex(y[idx]), ctrl, cloud=cloud).value
        return out

    t_r = transfer_apply(f, r_eval, x)
    resid = abs(r_x.value - t_r - complex(psi(x))) / (1.0 + abs(r_x.value))
    return resid, x, x


def _transfer_batch(f: RationalMap, g, xs: np.ndarray) -> np.ndarray:
    """(T g)(x) over an array; quadratic maps use the two-branch formula."""
    xs = np.asarray(xs, dtype=complex)
    c = f.monic_quadratic_c()
    if c is not None:
        s = np.sqrt(xs - c)
        gp = np.asarray(g(s), dtype=complex)
        gm = np.asarray(g(-s), dtype=complex)
        return (gp + gm) / (4.0 * (xs - c))
    out = np.empty(xs.shape, dtype=complex)
    flat = xs.reshape(-1)
    of = out.reshape(-1)
    for i, xv in enumerate(flat):
        of[i] = transfer_apply(f, g, complex(xv))
    return out


def _residual_duality(f: RationalMap, rng, samples: int) -> tuple[float, complex, complex]:
    from .fields import bounded_probe_field, pushforward_field
    from .grid import Grid, PolarRefined, integrate

    nu, support_box, outer_box = bounded_probe_field(f)
    g = test_functions(f)[0]
    seed = int(rng.integers(1 << 31))
    outer = Grid(outer_box[0], outer_box[1], 64).full_region()
    inner = Grid(support_box[0], support_box[1], 64).full_region()

    def lhs_fn(x):
        return np.asarray(g(x), dtype=complex) * np.asarray(
            pushforward_field(f, nu, x), dtype=complex)

    def rhs_fn(x):
        return np.asarray(nu.evaluate(x), dtype=complex) * _transfer_batch(f, g, x)

    lhs, _ = integrate(lhs_fn, outer, PolarRefined(samples, seed, tuple(g.poles)))
    rhs, _ = integrate(rhs_fn, inner, PolarRefined(samples, seed + 1, tuple(g.poles)))
    return abs(lhs - rhs), complex(lhs), complex(rhs)


def _residual_functional_eq(f: RationalMap, rng, samples: int,
                            nodes: int) -> tuple[float, complex, complex]:
    from .fields import bounded_probe_field, pushforward_field
    from .grid import Grid, MonteCarlo, PolarRefined, integrate

    nu, support_box, outer_box = bounded_probe_field(f)
    outer = Grid(outer_box[0], outer_box[1], 64).full_region()
    inner = Grid(support_box[0], support_box[1], 64).full_region()
    cloud = postcritical_cloud(f)
    scale = max(1.0, cloud.bbox_diameter())
    crit_pts = [c for c, _ in f.critical_points]

    # z in an annulus outside both boxes keeps every kernel bounded on them
    m = abs(outer_box[1])
    z = None
    for _ in range(200):
        cand = complex(complex_uniform(
            rng, complex(-2 * m, -2 * m), complex(2 * m, 2 * m), 1)[0])
        if abs(cand) < 1.25 * m or abs(cand) > 1.9 * m:
            continue
        if all(abs(cand - c) > 1e-2 * scale for c in crit_pts) \
                and abs(cand) > 1e-2 and abs(cand - 1.0) > 1e-2:
            z = cand
            break
    if z is None:
        raise LinefieldError("no valid z found for the functional equation")
    fz = complex(f.eval_plane(z))

    seed = int(rng.integers(1 << 31))
    sphere = f.kind == "sphere"
    data = l_coefficients(f, z, "sphere" if sphere else "cauchy", nodes=nodes)

    def transform(field_eval, region, w: complex, sub: int):
        if sphere:
            def fn(x):
                return np.asarray(field_eval(x), dtype=complex) * _sphere_psi(w, x)
            poles: tuple = (0j, 1 + 0j, w)
        else:
            def fn(x):
                return np.asarray(field_eval(x), dtype=complex) / (w - np.asarray(x))
            poles = (w,)
        val, err = integrate(fn, region,
                             PolarRefined(samples, seed + sub, poles))
        return val, err

    lhs, _ = transform(lambda x: pushforward_field(f, nu, x), outer, z, 0)
    rhs1, _ = transform(nu.evaluate, inner, fz, 1)
    rhs = rhs1 / complex(f.deriv_plane(z))
    # integrating the operator identity against nu flips the residue-sum
    # sign for the Cauchy kernel (int nu/(x - v) = -transform at v); the
    # integrable kernel keeps its plus sign
    sign = 1.0 if sphere else -1.0
    for k, (v_j, l_j) in enumerate(sorted(data.L.items(),
                                          key=lambda kv: (kv[0].real, kv[0].imag))):
        tv, _ = transform(nu.evaluate, inner, v_j, 2 + k)
        rhs += sign * l_j * tv
    if f.kind == "rational":
        def fn(x):
            flat = np.asarray(x, dtype=complex).reshape(-1)
            out = np.empty(flat.shape, dtype=complex)
            for i, xv in enumerate(flat):
                out[i] = i_infinity(f, z, complex(xv), nodes=nodes)
            return (np.asarray(nu.evaluate(x), dtype=complex)
                    * out.reshape(np.asarray(x).shape))
        iv, _ = integrate(fn, inner, MonteCarlo(max(200, samples // 10), seed + 77))
        rhs -= iv
    return abs(lhs - rhs), z, complex(lhs)


def _verify_chunk(args) -> list[tuple[float, complex, complex]]:
    # Seeding is per global sample index, so the worker partition cannot
    # change which points get drawn: chunks carry their start offset.
    f, which, n, seed, start, nodes, samples_mc = args
    ctrl = ResolventControl(tol=1e-9, max_depth=22)
    out: list[tuple[float, complex, complex]] = []
    for j in range(n):
        rng = stream(seed, 23, _IDENTITY_CODE[which], start + j)
        retries_left = 6
        while True:
            try:
                if which == "lemma_T":
                    out.append(_residual_lemma_T(f, rng, nodes))
                elif which == "lemma_Tc":
                    out.append(_residual_lemma_Tc(f, rng, nodes))
                elif which == "resolvent_eq":
                    out.append(_residual_resolvent_eq(f, rng, nodes, ctrl))
                elif which == "duality":
                    out.append(_residual_duality(f, rng, samples_mc))
                else:
                    out.append(_residual_functional_eq(f, rng, samples_mc, nodes))
                break
            except ConfigError:
                raise
            except LinefieldError:
                retries_left -= 1
                if retries_left <= 0:
                    out.append((math.inf, 0j, 0j))
                    break
    return out


def verify_identity(f: RationalMap, which: str, samples: int = 100,
                    tol: float = 1e-8, seed: int = 0, *,
                    nodes: int = CONTOUR_NODES, workers: int | None = None,
                    mc_samples: int = 20000) -> VerificationReport:
    """Sample an operator identity and report the residual statistics.

    lemma_T / lemma_Tc / resolvent_eq draw `samples` random query points and
    report scale-free residuals |LHS-RHS|/(1+|LHS|+|RHS|). duality and
    cauchy_functional_eq are Monte Carlo statements: each sample is one
    paired integral estimate with `mc_samples` draws, and the residual is
    the raw |LHS-RHS|, to be judged against a tolerance that budgets the
    MC error. Samples hitting guard errors are redrawn up to a retry cap,
    after which the report carries an infinite residual.
    """
    if which not in IDENTITIES:
        raise ConfigError(f"unknown identity {which!r}; choose from {IDENTITIES}")
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    if which in ("duality", "cauchy_functional_eq"):
        samples = min(samples, 8)

    if workers and workers > 1 and samples > 1:
        per = [samples // workers] * workers
        for i in range(samples % workers):
            per[i] += 1
        starts = [sum(per[:i]) for i in range(len(per))]
        jobs = [(f, which, n, seed, s, nodes, mc_samples)
                for n, s in zip(per, starts) if n > 0]
        rows: list[tuple[float, complex, complex]] = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_verify_chunk, jobs):
                rows.extend(part)
    else:
        rows = _verify_chunk((f, which, samples, seed, 0, nodes, mc_samples))

    resids = [r for r, _, _ in rows]
    worst = max(range(len(rows)), key=lambda i: resids[i])
    max_r = float(resids[worst])
    mean_r = float(np.mean([r for r in resids if math.isfinite(r)] or [math.inf]))
    return VerificationReport(
        identity_name=which,
        sample_count=len(rows),
        max_residual=max_r,
        mean_residual=mean_r,
        tol=tol,
        passed=bool(max_r <= tol),
        worst_sample=(rows[worst][1], rows[worst][2]),
    )
