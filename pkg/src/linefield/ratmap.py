"""Rational self-maps of the sphere with chart-aware evaluation.

A map is a coprime pair of polynomials num/den of degree >= 2. Maps carry an
optional classification `kind`:

 * "polynomial"  - den is constant (assigned automatically, and only then);
 * "rational"    - f(inf) = a is finite, a is not a critical value and inf
                   is not a critical point (the normalized non-polynomial
                   form used by the catalog of inverse-power test functions);
 * "sphere"      - f fixes inf, 1, 0 and none of the three is critical
                   (the form the sphere-kernel identities require);
 * None          - unclassified; normalization can assign one later.

Chart switching: points beyond |z| = 1e6 are handled in the w = 1/z chart,
and derivatives are tagged with the chart pair they live in.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    HintRequired,
    IndeterminateAtCommonRoot,
    NormalizationImpossible,
)
from .poly import Poly, roots

CHART_RADIUS = 1e6
_ESCAPE_CLAMP = 1e8

KINDS = ("polynomial", "rational", "sphere")


@dataclass(frozen=True)
class SpherePoint:
    """A point of the Riemann sphere: finite complex value or infinity."""

    z: complex = 0j
    at_infinity: bool = False

    @classmethod
    def finite(cls, z: complex) -> "SpherePoint":
        return cls(complex(z), False)

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(0j, True)

    @property
    def value(self) -> complex:
        if self.at_infinity:
            raise ValueError("point at infinity has no finite value")
        return self.z

    def __repr__(self) -> str:
        return "SpherePoint(inf)" if self.at_infinity else f"SpherePoint({self.z})"


INF = SpherePoint.infinity()


def as_sphere(x) -> SpherePoint:
    if isinstance(x, SpherePoint):
        return x
    z = complex(x)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        return INF
    return SpherePoint.finite(z)


@dataclass(frozen=True)
class MapEval:
    """Result of a chart-aware evaluation.

    chart names the coordinate pair of the derivative: "plane" (z to z),
    "z-w" (finite source, image near infinity read in w = 1/z), "w-z"
    (source read in w, finite image), "w-w" (both ends in the w chart).
    """

    image: SpherePoint
    derivative: complex
    chart: str


def _snap(p: Poly, rel: float = 1e-13) -> Poly:
    """Zero out relatively tiny coefficients (post-arithmetic cleanup)."""
    mx = float(np.max(np.abs(p.coeffs)))
    if mx == 0:
        return p
    c = p.coeffs.copy()
    c[np.abs(c) < rel * mx] = 0
    return Poly(c)


def _sylvester_resultant(p: Poly, q: Poly) -> complex:
    n, m = p.degree, q.degree
    if n == 0 or m == 0:
        return 1.0 + 0j
    size = n + m
    mat = np.zeros((size, size), dtype=complex)
    pc = p.coeffs[::-1]  # descending
    qc = q.coeffs[::-1]
    for i in range(m):
        mat[i, i : i + n + 1] = pc
    for i in range(n):
        mat[m + i, i : i + m + 1] = qc
    return complex(np.linalg.det(mat))


def _dedup(points: list[complex], tol_rel: float = 1e-8) -> list[complex]:
    out: list[complex] = []
    for p in sorted(points, key=lambda v: (v.real, v.imag)):
        if not any(abs(p - q) <= tol_rel * (1.0 + abs(q)) for q in out):
            out.append(p)
    return out


@dataclass(frozen=True)
class RationalMap:
    num: Poly
    den: Poly
    kind: str | None = None

    def __post_init__(self) -> None:
        num = _snap(self.num) if isinstance(self.num, Poly) else Poly(self.num)
        den = _snap(self.den) if isinstance(self.den, Poly) else Poly(self.den)
        if den.is_zero():
            raise ValueError("zero denominator")
        if num.is_zero():
            raise ValueError("zero numerator defines a constant map")
        # scale both by the denominator's leading coefficient for stability
        lead = den.coeffs[-1]
        object.__setattr__(self, "num", Poly(num.coeffs / lead))
        object.__setattr__(self, "den", Poly(den.coeffs / lead))
        if self.degree < 2:
            raise ValueError(f"degree {self.degree} map; need degree >= 2")
        if self.den.degree > 0:
            res = _sylvester_resultant(
                Poly(self.num.coeffs / np.max(np.abs(self.num.coeffs))),
                Poly(self.den.coeffs / np.max(np.abs(self.den.coeffs))),
            )
            if abs(res) < 1e-12:
                raise ValueError("numerator and denominator share a root")
        kind = self.kind
        if kind is not None and kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
        if self.den.degree == 0:
            if kind not in (None, "polynomial"):
                raise ValueError(f"{kind} kind requires a non-constant denominator")
            kind = "polynomial"
        elif kind == "polynomial":
            raise ValueError("polynomial kind requires a constant denominator")
        object.__setattr__(self, "kind", kind)
        if kind == "rational":
            self._validate_rational()
        elif kind == "sphere":
            self._validate_sphere()

    # -- basic structure ---------------------------------------------------

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    @cached_property
    def wronskian(self) -> Poly:
        return _snap(self.num.derivative() * self.den - self.num * self.den.derivative())

    def __repr__(self) -> str:
        return f"RationalMap({self.num.format()} / {self.den.format()}, kind={self.kind})"

    # -- evaluation ---------------------------------------------------------

    def eval_plane(self, z):
        """Vectorized f(z) for finite z; poles produce inf entries."""
        n = self.num(z)
        d = self.den(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return n / d

    def deriv_plane(self, z):
        """Vectorized plane derivative f'(z) for finite z."""
        n, dn = self.num.eval_with_derivative(z)
        d, dd = self.den.eval_with_derivative(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (dn * d - n * dd) / (d * d)

    @cached_property
    def _inverted(self) -> tuple[Poly, Poly]:
        """(num_w, den_w) with f(1/w) = num_w(w) / den_w(w)."""
        dn, dd = self.num.degree, self.den.degree
        nw = self.num.reversed()
        dw = self.den.reversed()
        if dd > dn:
            nw = nw * Poly(np.array([0, 1], dtype=complex)) ** (dd - dn)
        elif dn > dd:
            dw = dw * Poly(np.array([0, 1], dtype=complex)) ** (dn - dd)
        return nw, dw

    def eval_map(self, x) -> MapEval:
        """Chart-aware evaluation at a sphere point."""
        pt = as_sphere(x)
        if pt.at_infinity or abs(pt.z) > CHART_RADIUS:
            w = 0j if pt.at_infinity else 1.0 / pt.z
            nw, dw = self._inverted
            return self._eval_fraction(nw, dw, w, src="w")
        return self._eval_fraction(self.num, self.den, pt.z, src="z")

    def _eval_fraction(self, num: Poly, den: Poly, z: complex, src: str) -> MapEval:
        n, dn = num.eval_with_derivative(z)
        d, dd = den.eval_with_derivative(z)
        n_scale = float(np.max(np.abs(num.coeffs)))
        d_scale = float(np.max(np.abs(den.coeffs)))
        span = 1.0 + abs(z) ** max(num.degree, den.degree)
        if abs(n) <= 1e-14 * n_scale * span and abs(d) <= 1e-14 * d_scale * span:
            raise IndeterminateAtCommonRoot(f"both num and den vanish near {z}")
        if d == 0 or (n != 0 and abs(n / d) > CHART_RADIUS):
            # image read in the w = 1/f chart
            deriv = (dd * n - d * dn) / (n * n)
            chart = "z-w" if src == "z" else "w-w"
            return MapEval(INF, complex(deriv), chart)
        deriv = (dn * d - n * dd) / (d * d)
        chart = "plane" if src == "z" else "w-z"
        return MapEval(SpherePoint.finite(n / d), complex(deriv), chart)

    # -- critical portrait ---------------------------------------------------

    @cached_property
    def critical_points(self) -> list[tuple[complex, int]]:
        """Finite critical points with multiplicities, canonically ordered."""
        w = self.wronskian
        if w.degree < 1:
            if self.den.degree == 0 and self.num.degree == 1:
                return []
            if w.is_zero():
                raise ValueError("degenerate map: identically critical")
            return []
        return roots(w, tol=1e-11)

    @cached_property
    def infinity_critical(self) -> bool:
        """Whether infinity is a critical point (local degree > 1)."""
        nw, dw = self._inverted
        g0 = self.eval_map(INF)
        if g0.image.at_infinity:
            # local degree = vanishing order of w -> 1/f(1/w) at 0
            h = dw  # 1/f(1/w) = dw/nw; zero order at 0 = order of dw at 0
            order = _vanishing_order(h)
            return order > 1
        # finite image: order of (f(1/w) - f(inf)) at w = 0
        shifted = nw - g0.image.value * dw
        return _vanishing_order(shifted) > 1

    @cached_property
    def critical_values(self) -> list[complex]:
        """Finite critical values (deduped, canonically ordered)."""
        vals = []
        for c, _m in self.critical_points:
            img = self.eval_map(c).image
            if not img.at_infinity:
                vals.append(img.value)
        return _dedup(vals)

    @cached_property
    def critical_value_groups(self) -> list[tuple[complex, list[tuple[complex, int]]]]:
        """Each finite critical value with the finite critical points over it."""
        groups: list[tuple[complex, list[tuple[complex, int]]]] = [
            (v, []) for v in self.critical_values
        ]
        for c, m in self.critical_points:
            img = self.eval_map(c).image
            if img.at_infinity:
                continue
            v = img.value
            best = min(range(len(groups)), key=lambda i: abs(groups[i][0] - v))
            groups[best][1].append((c, m))
        return groups

    def fixed_points(self) -> list[tuple[SpherePoint, complex]]:
        """(point, multiplier) pairs; infinity's multiplier is in the w chart."""
        fixed = _snap(self.num - Poly(np.array([0, 1], dtype=complex)) * self.den)
        out: list[tuple[SpherePoint, complex]] = []
        if fixed.degree >= 1:
            for z, _m in roots(fixed, tol=1e-11):
                out.append((SpherePoint.finite(z), complex(self.deriv_plane(z))))
        if self.num.degree > self.den.degree:
            ev = self.eval_map(INF)
            if ev.image.at_infinity:
                out.append((INF, ev.derivative))
        return out

    # -- composition / conjugation -------------------------------------------

    def compose_with(self, inner: "RationalMap") -> "RationalMap":
        """self(inner(z)) as a rational map (kind is dropped)."""
        p, q = inner.num, inner.den
        m = self.degree

        def homog(poly: Poly) -> Poly:
            acc = Poly(np.zeros(1, dtype=complex))
            for k, c in enumerate(poly.coeffs):
                if c == 0:
                    continue
                acc = acc + c * (p**k) * (q ** (m - k))
            return acc

        return RationalMap(_snap(homog(self.num)), _snap(homog(self.den)), kind=None)

    def iterate(self, n: int) -> "RationalMap":
        if n < 1:
            raise ValueError("iterate count must be >= 1")
        out = self
        for _ in range(n - 1):
            out = self.compose_with(out)
        return out

    def monic_quadratic_c(self) -> complex | None:
        """c when the map is exactly z**2 + c; None otherwise."""
        if self.den.degree != 0 or self.num.degree != 2:
            return None
        c2 = self.num.coeffs[2]
        c1 = self.num.coeffs[1]
        if c1 == 0 and abs(c2 - 1) == 0:
            return complex(self.num.coeffs[0])
        return None

    # -- kind validation -------------------------------------------------------

    def value_at_infinity(self) -> SpherePoint:
        return self.eval_map(INF).image

    def _validate_rational(self) -> None:
        img = self.value_at_infinity()
        if img.at_infinity:
            raise ValueError("rational kind requires f(inf) finite")
        a = img.value
        if self.infinity_critical:
            raise ValueError("rational kind requires infinity non-critical")
        for v in self.critical_values:
            if abs(a - v) <= 1e-8 * (1.0 + abs(v)):
                raise ValueError("rational kind requires f(inf) off the critical values")

    def _validate_sphere(self) -> None:
        if self.num.degree != self.den.degree + 1:
            raise ValueError("sphere kind requires a simple fixed point at infinity")
        scale = float(np.max(np.abs(self.num.coeffs)))
        if abs(self.num(0j)) > 1e-8 * scale:
            raise ValueError("sphere kind requires f(0) = 0")
        if abs(self.num(1.0 + 0j) - self.den(1.0 + 0j)) > 1e-8 * scale:
            raise ValueError("sphere kind requires f(1) = 1")
        w = self.wronskian
        w_scale = float(np.max(np.abs(w.coeffs)))
        for p in (0j, 1.0 + 0j):
            if abs(w(p)) <= 1e-8 * w_scale:
                raise ValueError("sphere kind requires 0 and 1 non-critical")

    @property
    def a_value(self) -> complex:
        """f(inf) for rational-kind maps."""
        if self.kind != "rational":
            raise ValueError("a_value only exists for rational kind")
        return self.value_at_infinity().value


def _vanishing_order(p: Poly, rel: float = 1e-10) -> int:
    mx = float(np.max(np.abs(p.coeffs)))
    if mx == 0:
        return len(p.coeffs)
    for k, c in enumerate(p.coeffs):
        if abs(c) > rel * mx:
            return k
    return len(p.coeffs)


# -- Mobius transformations ----------------------------------------------------


@dataclass(frozen=True)
class Mobius:
    """(az+b)/(cz+d), stored with determinant normalized to 1."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self) -> None:
        det = self.a * self.d - self.b * self.c
        if det == 0:
            raise ValueError("singular Mobius coefficients")
        s = 1.0 / cmath.sqrt(det)
        for name, v in zip("abcd", (self.a * s, self.b * s, self.c * s, self.d * s)):
            object.__setattr__(self, name, complex(v))

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1, 0, 0, 1)

    def is_identity(self, tol: float = 1e-12) -> bool:
        # det normalization leaves a sign; a == d with b = c = 0 means z -> z
        return (abs(self.b) <= tol and abs(self.c) <= tol
                and abs(self.a - self.d) <= tol)

    @classmethod
    def to_standard_triple(cls, p_inf: SpherePoint, p_one: SpherePoint, p_zero: SpherePoint) -> "Mobius":
        """The unique Mobius with p_inf -> inf, p_one -> 1, p_zero -> 0."""
        pts = (p_inf, p_one, p_zero)
        if sum(p.at_infinity for p in pts) > 1:
            raise ValueError("triple contains infinity twice")
        if p_inf.at_infinity:
            z1, z0 = p_one.value, p_zero.value
            return cls(1, -z0, 0, z1 - z0)
        if p_zero.at_infinity:
            # m(z) = (p1 - pinf) / (z - pinf)
            return cls(0, p_one.value - p_inf.value, 1, -p_inf.value)
        if p_one.at_infinity:
            return cls(1, -p_zero.value, 1, -p_inf.value)
        z_i, z_1, z_0 = p_inf.value, p_one.value, p_zero.value
        k = (z_1 - z_i) / (z_1 - z_0)
        return cls(k, -k * z_0, 1, -z_i)

    def apply(self, x) -> SpherePoint:
        pt = as_sphere(x)
        if pt.at_infinity:
            if self.c == 0:
                return INF
            return SpherePoint.finite(self.a / self.c)
        denom = self.c * pt.z + self.d
        if denom == 0:
            return INF
        return SpherePoint.finite((self.a * pt.z + self.b) / denom)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "Mobius") -> "Mobius":
        """self(other(z))."""
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def conjugate(self, f: RationalMap, kind: str | None = None) -> RationalMap:
        """m o f o m^{-1} as a rational map."""
        inv = self.inverse()
        # f(m^{-1}(w)) with m^{-1}(w) = (inv.a w + inv.b)/(inv.c w + inv.d)
        m_deg = f.degree
        p = Poly(np.array([inv.b, inv.a], dtype=complex))
        q = Poly(np.array([inv.d, inv.c], dtype=complex))

        def homog(poly: Poly) -> Poly:
            acc = Poly(np.zeros(1, dtype=complex))
            for k, c in enumerate(poly.coeffs):
                if c == 0:
                    continue
                acc = acc + c * (p**k) * (q ** (m_deg - k))
            return acc

        pn = homog(f.num)
        pd = homog(f.den)
        gnum = self.a * pn + self.b * pd
        gden = self.c * pn + self.d * pd
        return RationalMap(_snap(gnum), _snap(gden), kind=kind)


# -- normalization ---------------------------------------------------------------


@dataclass(frozen=True)
class NormalizeResult:
    map: RationalMap
    mobius: Mobius


def normalize(f: RationalMap, mode: str, hints: dict | None = None) -> NormalizeResult:
    """Produce a classified copy of f by Mobius conjugation.

    mode "A": rational kind. hints must carry "fatou_point": a point p the
    caller asserts lies in a rotation-free invariant Fatou component (this is
    not machine-checkable here and is trusted). p is sent to infinity.

    mode "B": sphere kind. hints may carry "triple": three fixed points
    ordered (to_infinity, to_one, to_zero); otherwise an admissible triple of
    non-critical fixed points is chosen deterministically (infinity first,
    then by descending multiplier magnitude).
    """
    hints = hints or {}
    if mode == "A":
        if "fatou_point" not in hints:
            raise HintRequired("mode A needs hints['fatou_point']")
        p = as_sphere(hints["fatou_point"])
        if p.at_infinity:
            m = Mobius.identity()
        else:
            m = Mobius(0, 1, 1, -p.value)  # z -> 1/(z - p)
        g = m.conjugate(f, kind=None)
        try:
            g = RationalMap(g.num, g.den, kind="rational")
        except ValueError as exc:
            raise NormalizationImpossible(str(exc)) from exc
        return NormalizeResult(g, m)

    if mode == "B":
        triple = hints.get("triple")
        if triple is None:
            triple = _pick_fixed_triple(f)
        triple = tuple(as_sphere(t) for t in triple)
        if len(triple) != 3:
            raise HintRequired("mode B triple must have three points")
        m = Mobius.to_standard_triple(*triple)
        g = m.conjugate(f, kind=None)
        try:
            g = RationalMap(g.num, g.den, kind="sphere")
        except ValueError as exc:
            raise NormalizationImpossible(str(exc)) from exc
        return NormalizeResult(g, m)

    raise ValueError(f"unknown normalization mode {mode!r}")


def _pick_fixed_triple(f: RationalMap) -> tuple[SpherePoint, SpherePoint, SpherePoint]:
    candidates: list[tuple[SpherePoint, complex]] = []
    w = f.wronskian
    w_scale = float(np.max(np.abs(w.coeffs)))
    for pt, mult in f.fixed_points():
        if pt.at_infinity:
            if not f.infinity_critical:
                candidates.append((pt, mult))
        elif abs(w(pt.z)) > 1e-9 * w_scale * (1.0 + abs(pt.z) ** max(0, w.degree)):
            candidates.append((pt, mult))
    if len(candidates) < 3:
        raise NormalizationImpossible(
            f"only {len(candidates)} non-critical fixed points available"
        )
    # already in the normal form: keep (inf, 1, 0) so conjugation is the identity
    std = []
    for target in ("inf", 1.0 + 0j, 0j):
        for pt, _ in candidates:
            if target == "inf":
                if pt.at_infinity:
                    std.append(pt)
                    break
            elif not pt.at_infinity and abs(pt.z - target) <= 1e-9:
                std.append(pt)
                break
    if len(std) == 3:
        return (std[0], std[1], std[2])
    # deterministic: infinity first, then descending |multiplier|, then position
    def sort_key(item):
        pt, mult = item
        return (
            0 if pt.at_infinity else 1,
            -abs(mult),
            0.0 if pt.at_infinity else pt.z.real,
            0.0 if pt.at_infinity else pt.z.imag,
        )

    chosen = sorted(candidates, key=sort_key)[:3]
    return (chosen[0][0], chosen[1][0], chosen[2][0])


# -- postcritical cloud ---------------------------------------------------------


@dataclass(frozen=True)
class PostcriticalCloud:
    """Forward images of the critical values, merged and clamped."""

    points: np.ndarray
    has_infinity: bool
    a_points: np.ndarray
    horizon: int
    merge_eps: float
    sphere_marked: tuple[complex, ...] = field(default=())

    def all_finite(self) -> np.ndarray:
        parts = [self.points, self.a_points]
        if self.sphere_marked:
            parts.append(np.array(self.sphere_marked, dtype=complex))
        return np.concatenate([p for p in parts if p.size] or [np.zeros(0, complex)])

    def min_distance(self, x) -> np.ndarray | float:
        pts = self.all_finite()
        x_arr = np.asarray(x, dtype=complex)
        if pts.size == 0:
            return np.full(x_arr.shape, np.inf) if x_arr.ndim else float("inf")
        d = np.abs(x_arr[..., None] - pts[None, ...]) if x_arr.ndim else np.abs(x_arr - pts)
        out = d.min(axis=-1)
        return out if x_arr.ndim else float(out)

    def bbox_diameter(self) -> float:
        pts = self.all_finite()
        if pts.size == 0:
            return 0.0
        dre = float(pts.real.max() - pts.real.min())
        dim = float(pts.imag.max() - pts.imag.min())
        return float(np.hypot(dre, dim))

    def exclusion_radius(self) -> float:
        """Default holomorphy-domain exclusion radius around cloud points."""
        return 1e-3 * max(self.bbox_diameter(), 1.0)


def _orbit_collect(f: RationalMap, start: complex, horizon: int, merge_eps: float
                   ) -> tuple[list[complex], bool]:
    pts = [complex(start)]
    z = complex(start)
    escaped = False
    for _ in range(horizon):
        ev = f.eval_map(z)
        if ev.image.at_infinity:
            escaped = True
            break
        z = ev.image.value
        if abs(z) > _ESCAPE_CLAMP:
            escaped = True
            break
        if any(abs(z - q) <= merge_eps * (1.0 + abs(q)) for q in pts):
            break  # cycle closed
        pts.append(z)
    return pts, escaped


def postcritical_cloud(
    f: RationalMap, n_max: int = 200, merge_eps: float = 1e-9
) -> PostcriticalCloud:
    """Forward orbits of all finite critical values up to n_max steps.

    Escaping orbits set has_infinity and are clamped. For rational-kind maps
    the orbit of a = f(inf) is collected as a separately labeled cloud. For
    sphere-kind maps the marked points {0, 1} join the exclusion set (they
    are fixed, so this only makes the extra poles of the kernel explicit).
    """
    merged: list[complex] = []
    has_inf = False
    for v in f.critical_values:
        pts, escaped = _orbit_collect(f, v, n_max, merge_eps)
        has_inf = has_inf or escaped
        merged.extend(pts)
    for c, _m in f.critical_points:
        img = f.eval_map(c).image
        if img.at_infinity:
            has_inf = True
    points = np.array(_dedup(merged, merge_eps), dtype=complex)

    a_pts = np.zeros(0, dtype=complex)
    marked: tuple[complex, ...] = ()
    if f.kind == "rational":
        apts, a_escaped = _orbit_collect(f, f.a_value, n_max, merge_eps)
        has_inf = has_inf or a_escaped
        a_pts = np.array(_dedup(apts, merge_eps), dtype=complex)
    elif f.kind == "sphere":
        marked = (0j, 1.0 + 0j)
    return PostcriticalCloud(points, has_inf, a_pts, n_max, merge_eps, marked)


# -- map files --------------------------------------------------------------------


def parse_map_text(text: str) -> RationalMap:
    """Parse the three-line map format: numerator, denominator, kind tag."""
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if len(lines) != 3:
        raise ValueError(f"map text needs 3 content lines, found {len(lines)}")
    num = Poly.parse(lines[0])
    den = Poly.parse(lines[1])
    tag = lines[2].lower()
    if tag == "general":
        kind = None
    elif tag in KINDS:
        kind = tag
    else:
        raise ValueError(f"unknown kind tag {tag!r}")
    return RationalMap(num, den, kind=kind)


def format_map_text(f: RationalMap) -> str:
    tag = f.kind if f.kind is not None else "general"
    return f"{f.num.format()}\n{f.den.format()}\n{tag}\n"


def load_map(path) -> RationalMap:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_map_text(fh.read())


def save_map(f: RationalMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_map_text(f))
