"""Complex polynomials: representation, text format, evaluation, roots.

Coefficients are stored ascending (coeffs[k] multiplies z**k), matching the
text interchange format "a+bi,a+bi,..." used by map files and the CLI.

The root finder is a simultaneous Aberth-Ehrlich iteration polished by a few
Newton steps, followed by deterministic multiplicity clustering. numpy's
eigenvalue-based roots are deliberately not used here: tests employ them as
an independent cross-check.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npp

from .errors import NonConvergence

_COEFF_SPLIT = re.compile(r"\s*,\s*")


def _trim(coeffs: np.ndarray) -> np.ndarray:
    """Drop exactly-zero leading (highest-degree) coefficients."""
    arr = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    nz = np.nonzero(arr)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return arr[: nz[-1] + 1].copy()


def parse_coefficient(token: str) -> complex:
    """Parse one 'a+bi' token (plain reals and pure-imaginary forms allowed)."""
    t = token.strip().replace(" ", "").replace("i", "j")
    try:
        value = complex(t)
    except ValueError as exc:
        raise ValueError(f"bad coefficient token {token!r}") from exc
    if not np.isfinite(value.real) or not np.isfinite(value.imag):
        raise ValueError(f"non-finite coefficient {token!r}")
    return value


def format_coefficient(c: complex) -> str:
    """Render a coefficient as 'a+bi' with 17 significant digits."""
    return f"{c.real:.17g}{c.imag:+.17g}i"


@dataclass(frozen=True)
class Poly:
    """Polynomial with ascending complex coefficients."""

    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @classmethod
    def parse(cls, text: str) -> "Poly":
        tokens = _COEFF_SPLIT.split(text.strip())
        return cls(np.array([parse_coefficient(t) for t in tokens]))

    @classmethod
    def from_roots(cls, roots: "list[complex] | np.ndarray", lead: complex = 1.0) -> "Poly":
        return cls(lead * npp.polyfromroots(np.asarray(roots, dtype=complex)))

    def format(self) -> str:
        return ",".join(format_coefficient(c) for c in self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        return npp.polyval(z, self.coeffs)

    def eval_with_derivative(self, z):
        """Fused Horner evaluation of (p(z), p'(z)); z may be an array."""
        v = np.zeros_like(np.asarray(z, dtype=complex))
        d = np.zeros_like(v)
        for c in self.coeffs[::-1]:
            d = d * z + v
            v = v * z + c
        if np.ndim(z) == 0:
            return complex(v), complex(d)
        return v, d

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly(np.zeros(1, dtype=complex))
        return Poly(npp.polyder(self.coeffs))

    def reversed(self, pad_to: int | None = None) -> "Poly":
        """Coefficients reversed: p.reversed()(w) = w**deg * p(1/w)."""
        arr = self.coeffs
        if pad_to is not None and pad_to + 1 > len(arr):
            arr = np.concatenate([arr, np.zeros(pad_to + 1 - len(arr), dtype=complex)])
        return Poly(arr[::-1])

    def compose(self, inner: "Poly") -> "Poly":
        """self(inner(z)) by Horner over polynomial arithmetic."""
        acc = np.array([self.coeffs[-1]], dtype=complex)
        for c in self.coeffs[-2::-1]:
            acc = npp.polyadd(npp.polymul(acc, inner.coeffs), [c])
        return Poly(acc)

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly(np.array([other]))
        return Poly(npp.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other):
        other = other if isinstance(other, Poly) else Poly(np.array([other]))
        return Poly(npp.polysub(self.coeffs, other.coeffs))

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(npp.polymul(self.coeffs, other.coeffs))
        return Poly(self.coeffs * other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative polynomial power")
        out = Poly(np.ones(1, dtype=complex))
        for _ in range(n):
            out = out * self
        return out

    def scale(self) -> float:
        """Residual normalizer: (degree+1) * max coefficient magnitude."""
        return (self.degree + 1) * float(np.max(np.abs(self.coeffs)))


def horner_eval(coeffs, z):
    """Module-level fused (value, derivative) evaluation on ascending coeffs."""
    return Poly(np.asarray(coeffs, dtype=complex)).eval_with_derivative(z)


def multiplicity_radius(tol: float, magnitude: float) -> float:
    """Cluster radius for root merging: max(10*tol, 1e-7) * (1 + |root|)."""
    return max(10.0 * tol, 1e-7) * (1.0 + magnitude)


def _aberth_once(c: np.ndarray, max_iter: int = 160) -> np.ndarray:
    """Aberth-Ehrlich iteration on a single normalized coefficient row."""
    n = len(c) - 1
    dcoef = npp.polyder(c)
    # initial fan: geometric-mean radius with an irrational angular offset to
    # break symmetric configurations
    lead = abs(c[-1])
    tail = abs(c[0])
    radius = (tail / lead) ** (1.0 / n) if tail > 0 else 0.5
    radius = min(max(radius, 1e-3), 1.0 + float(np.max(np.abs(c[:-1]))) / lead)
    angles = 2.0 * np.pi * (np.arange(n) + 0.5) / n + 0.40
    z = radius * np.exp(1j * angles)

    coef_abs = np.abs(c)
    for _ in range(max_iter):
        v = npp.polyval(z, c)
        d = npp.polyval(z, dcoef)
        # backward-error stop: exact root of a polynomial within eps of c
        bound = npp.polyval(np.abs(z), coef_abs)
        if np.all(np.abs(v) <= 1e-14 * (bound + 1e-300)):
            break
        d = np.where(d == 0, 1e-30, d)
        w = v / d
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-30, 1e-30, denom)
        step = w / denom
        z = z - step
        if np.max(np.abs(step)) < 1e-16 * (1.0 + np.max(np.abs(z))):
            break
    # Newton polish
    for _ in range(3):
        v = npp.polyval(z, c)
        d = npp.polyval(z, dcoef)
        ok = np.abs(d) > 1e-30
        z = np.where(ok, z - v / np.where(ok, d, 1.0), z)
    return z


def roots(p: Poly, tol: float = 1e-9) -> list[tuple[complex, int]]:
    """All roots of p with multiplicities, sorted by (real, imag).

    Each returned root r satisfies |p(r)| <= tol * p.scale(); clusters within
    the multiplicity radius are merged to their centroid and reported once
    with the cluster size as multiplicity. Raises NonConvergence when the
    residual contract cannot be met.
    """
    if p.degree < 1:
        raise ValueError("roots of a constant polynomial")
    scale = float(np.max(np.abs(p.coeffs)))
    c = p.coeffs / scale
    z = _aberth_once(c)

    contract = tol * (p.degree + 1)
    resid = np.abs(npp.polyval(z, c))
    if np.any(resid > contract):
        raise NonConvergence(
            f"root residual {np.max(resid):.3e} above contract {contract:.3e}"
        )

    # deterministic clustering: union roots within the multiplicity radius
    order = np.lexsort((z.imag, z.real))
    z = z[order]
    parent = list(range(len(z)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            r = multiplicity_radius(tol, max(abs(z[i]), abs(z[j])))
            if abs(z[i] - z[j]) <= r:
                parent[find(j)] = find(i)
    groups: dict[int, list[complex]] = {}
    for i in range(len(z)):
        groups.setdefault(find(i), []).append(complex(z[i]))
    merged = [(complex(np.mean(g)), len(g)) for g in groups.values()]
    merged.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    return merged


def roots_batch(coeff_rows: np.ndarray, iters: int = 80) -> np.ndarray:
    """Simple roots of a batch of same-degree polynomials, shape (B, n+1) -> (B, n).

    No clustering and no residual contract: intended for sampling paths
    (inverse iteration, layer solves) where callers tolerate merged branches.
    """
    rows = np.asarray(coeff_rows, dtype=complex)
    if rows.ndim != 2 or rows.shape[1] < 2:
        raise ValueError("expected (B, n+1) coefficient rows with n >= 1")
    bsz, width = rows.shape
    n = width - 1
    scale = np.max(np.abs(rows), axis=1, keepdims=True)
    scale = np.where(scale == 0, 1.0, scale)
    c = rows / scale

    lead = np.abs(c[:, -1])
    lead = np.where(lead < 1e-300, 1e-300, lead)
    tail = np.abs(c[:, 0])
    radius = np.where(tail > 0, (tail / lead) ** (1.0 / n), 0.5)
    radius = np.clip(radius, 1e-3, 10.0)
    angles = 2.0 * np.pi * (np.arange(n) + 0.5) / n + 0.40
    z = radius[:, None] * np.exp(1j * angles)[None, :]

    dcoef = np.arange(1, width)[None, :] * c[:, 1:]

    def _val(coeffs: np.ndarray, pts: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(pts)
        for k in range(coeffs.shape[1] - 1, -1, -1):
            acc = acc * pts + coeffs[:, k][:, None]
        return acc

    for _ in range(iters):
        v = _val(c, z)
        d = _val(dcoef, z)
        d = np.where(d == 0, 1e-30, d)
        w = v / d
        diff = z[:, :, None] - z[:, None, :]
        idx = np.arange(n)
        diff[:, idx, idx] = np.inf
        s = np.sum(1.0 / diff, axis=2)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-30, 1e-30, denom)
        step = w / denom
        z = z - step
        if np.max(np.abs(step)) < 1e-15 * (1.0 + np.max(np.abs(z))):
            break
    for _ in range(2):
        v = _val(c, z)
        d = _val(dcoef, z)
        ok = np.abs(d) > 1e-30
        z = np.where(ok, z - v / np.where(ok, d, 1.0), z)
    return z
