"""Grids, cell sets, Julia-set models, fundamental sets, and area integrals.

Cells are classified by center/corner samples only; sets carry a uint8 mask
over a square grid, and count * cell_area is the only exported measure.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels, pnm
from .errors import ConfigError, PoleInRegion, SeedNotRepelling
from .poly import roots_batch
from .ratmap import RationalMap, postcritical_cloud
from .rng import stream

__all__ = [
    "Grid",
    "CellSet",
    "FundamentalSetApprox",
    "CellMidpoint",
    "MonteCarlo",
    "PolarRefined",
    "julia_cells",
    "fundamental_set",
    "pullback_partition",
    "PartitionResult",
    "integrate",
    "load_cellset",
]


@dataclass(frozen=True)
class Grid:
    """Square bounding box split into resolution x resolution square cells."""

    lo: complex
    hi: complex
    resolution: int

    def __post_init__(self) -> None:
        w = self.hi.real - self.lo.real
        h = self.hi.imag - self.lo.imag
        if w <= 0 or h <= 0:
            raise ConfigError("grid box is degenerate")
        if abs(w - h) > 1e-9 * max(w, h):
            raise ConfigError("grid box must be square (equal side lengths)")
        if self.resolution < 8:
            raise ConfigError("grid resolution must be >= 8")

    @classmethod
    def square(cls, center: complex, halfwidth: float, resolution: int) -> "Grid":
        d = halfwidth * (1 + 1j)
        return cls(center - d, center + d, resolution)

    @property
    def cell(self) -> float:
        return (self.hi.real - self.lo.real) / self.resolution

    @property
    def cell_area(self) -> float:
        return self.cell * self.cell

    @property
    def cell_diag(self) -> float:
        return self.cell * math_sqrt2

    def centers(self) -> np.ndarray:
        """Cell centers, flat, index iy*res + ix (matching mask layout)."""
        n = self.resolution
        t = (np.arange(n) + 0.5) * self.cell
        xs = self.lo.real + t
        ys = self.lo.imag + t
        gx, gy = np.meshgrid(xs, ys)
        return (gx + 1j * gy).reshape(-1)

    def corner_lattice(self) -> np.ndarray:
        """(res+1)^2 cell corners, flat, index iy*(res+1) + ix."""
        n = self.resolution + 1
        t = np.arange(n) * self.cell
        xs = self.lo.real + t
        ys = self.lo.imag + t
        gx, gy = np.meshgrid(xs, ys)
        return (gx + 1j * gy).reshape(-1)

    def cell_of(self, pts) -> np.ndarray:
        """Flat cell index per point, -1 outside the box (inf/nan included)."""
        pts = np.asarray(pts, dtype=complex)
        fin = np.isfinite(pts.real) & np.isfinite(pts.imag)
        re = np.where(fin, pts.real, self.lo.real - 1.0)
        im = np.where(fin, pts.imag, self.lo.imag - 1.0)
        # clip before the int cast; huge orbit escapees overflow int64
        n = float(self.resolution)
        qx = np.clip(np.floor((re - self.lo.real) / self.cell), -1.0, n)
        qy = np.clip(np.floor((im - self.lo.imag) / self.cell), -1.0, n)
        ix = qx.astype(np.int64)
        iy = qy.astype(np.int64)
        ok = (ix >= 0) & (ix < self.resolution) & (iy >= 0) & (iy < self.resolution)
        out = np.where(ok, iy * self.resolution + ix, -1)
        return out

    def full_region(self) -> "CellSet":
        return CellSet(self, np.ones((self.resolution,) * 2, dtype=np.uint8))

    def empty_region(self) -> "CellSet":
        return CellSet(self, np.zeros((self.resolution,) * 2, dtype=np.uint8))

    def box_tuple(self) -> list[float]:
        return [self.lo.real, self.lo.imag, self.hi.real, self.hi.imag]


math_sqrt2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class CellSet:
    """A set of grid cells as a uint8 mask indexed [iy, ix]."""

    grid: Grid
    mask: np.ndarray

    def __post_init__(self) -> None:
        m = np.ascontiguousarray(
            (np.asarray(self.mask) != 0).astype(np.uint8))
        n = self.grid.resolution
        if m.shape != (n, n):
            raise ConfigError(f"mask shape {m.shape} != ({n}, {n})")
        object.__setattr__(self, "mask", m)

    @classmethod
    def from_disks(cls, grid: Grid, disks) -> "CellSet":
        centers = grid.centers()
        m = np.zeros(centers.shape, dtype=bool)
        for c, r in disks:
            m |= np.abs(centers - c) <= r
        return cls(grid, m.reshape(grid.resolution, grid.resolution))

    @classmethod
    def from_predicate(cls, grid: Grid, fn) -> "CellSet":
        m = np.asarray(fn(grid.centers()), dtype=bool)
        return cls(grid, m.reshape(grid.resolution, grid.resolution))

    def _check(self, other: "CellSet") -> None:
        if other.grid != self.grid:
            raise ConfigError("cell sets live on different grids")

    def __or__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.grid, self.mask | other.mask)

    def __and__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.grid, self.mask & other.mask)

    def __sub__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.grid, self.mask & (1 - other.mask))

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def area(self) -> float:
        return self.count * self.grid.cell_area

    def is_empty(self) -> bool:
        return self.count == 0

    def centers(self) -> np.ndarray:
        """Centers of the marked cells."""
        flat = self.mask.reshape(-1).astype(bool)
        return self.grid.centers()[flat]

    def contains(self, pts) -> np.ndarray:
        idx = self.grid.cell_of(pts)
        flat = self.mask.reshape(-1)
        out = np.zeros(np.shape(idx), dtype=bool)
        ok = idx >= 0
        out[ok] = flat[idx[ok]] != 0
        return out

    def save(self, path) -> None:
        """P4 bitmap (top row = highest im) plus a JSON sidecar."""
        path = Path(path)
        pnm.write_pbm(path, self.mask[::-1, :])
        sidecar = {"box": self.grid.box_tuple(),
                   "resolution": self.grid.resolution}
        path.with_suffix(path.suffix + ".json").write_text(
            json.dumps(sidecar, indent=1) + "\n", encoding="utf-8")


def load_cellset(path) -> CellSet:
    path = Path(path)
    bits = pnm.read_pbm(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text(
        encoding="utf-8"))
    b = meta["box"]
    grid = Grid(complex(b[0], b[1]), complex(b[2], b[3]),
                int(meta["resolution"]))
    return CellSet(grid, bits[::-1, :])


@dataclass(frozen=True)
class FundamentalSetApprox:
    """K(W) and K' = f^{-1}(K) \\ K at a finite horizon, with emptiness flags.

    julia is the J model the sets were cut from; it is carried along because
    the pullback partition decomposes J-cells by first entry into Kprime.
    """

    K: CellSet
    Kprime: CellSet
    W: CellSet
    horizon: int
    K_empty: bool
    Kprime_empty: bool
    julia: CellSet = field(repr=False, default=None)


def _infinity_args(f: RationalMap) -> tuple[complex, bool]:
    v = f.value_at_infinity()
    if v.at_infinity:
        return complex(np.nan, np.nan), False
    return v.value, True


def julia_cells(f: RationalMap, grid: Grid, *, iter_cap: int = 256,
                escape_radius: float = 1e3, inverse_samples: int = 120_000,
                seed: int = 0) -> CellSet:
    """Grid model of the Julia set.

    Polynomials: corner-sample escape classification; a cell is marked when
    its corners mix escaping/non-escaping status or an escaping corner's
    distance estimate is below 0.75 cell diagonals. Other maps: cells hit
    by random backward orbits from a repelling fixed point (100-step
    burn-in discarded).
    """
    if f.den.degree == 0:
        coeffs = f.num.coeffs / f.den.coeffs[0]
        corners = grid.corner_lattice()
        times, zabs2, dzabs2, dzexp = kernels.poly_escape(
            coeffs, corners, iter_cap, escape_radius)
        de = kernels.distance_estimate(times, zabs2, dzabs2, dzexp)
        n = grid.resolution
        esc = (times >= 0).reshape(n + 1, n + 1)
        near = (de <= 0.75 * grid.cell_diag).reshape(n + 1, n + 1)

        def cellview(a):
            return a[:-1, :-1], a[1:, :-1], a[:-1, 1:], a[1:, 1:]

        any_esc = np.zeros((n, n), dtype=bool)
        all_esc = np.ones((n, n), dtype=bool)
        any_near = np.zeros((n, n), dtype=bool)
        for quad in cellview(esc):
            any_esc |= quad
            all_esc &= quad
        for quad in cellview(near):
            any_near |= quad
        mixed = any_esc & ~all_esc
        return CellSet(grid, mixed | any_near)

    seed_pt = None
    best = 0.0
    for p, mult in f.fixed_points():
        if p.at_infinity or not np.isfinite(abs(mult)):
            continue
        if abs(mult) > max(1.0 + 1e-9, best):
            seed_pt, best = p.value, abs(mult)
    if seed_pt is None:
        raise SeedNotRepelling("no finite repelling fixed point to seed "
                               "inverse iteration")

    rng = stream(seed, 31)
    walkers = 512
    burn_in = 100
    rounds = burn_in + max(1, -(-inverse_samples // walkers))
    z = np.full(walkers, seed_pt, dtype=complex)
    mask = np.zeros(grid.resolution * grid.resolution, dtype=np.uint8)
    deg = f.degree
    width = max(f.num.degree, f.den.degree) + 1
    num_pad = np.zeros(width, dtype=complex)
    num_pad[: f.num.degree + 1] = f.num.coeffs
    den_pad = np.zeros(width, dtype=complex)
    den_pad[: f.den.degree + 1] = f.den.coeffs
    for step in range(rounds):
        rows = num_pad[None, :] - z[:, None] * den_pad[None, :]
        sols = roots_batch(rows)
        take = rng.integers(sols.shape[1], size=walkers)
        z = sols[np.arange(walkers), take]
        dead = ~(np.isfinite(z.real) & np.isfinite(z.imag))
        if dead.any():
            z[dead] = seed_pt
        if step >= burn_in:
            idx = grid.cell_of(z)
            mask[idx[idx >= 0]] = 1
    del deg
    return CellSet(grid, mask.reshape(grid.resolution, grid.resolution))


def fundamental_set(f: RationalMap, W: CellSet, horizon: int,
                    julia: CellSet | None = None) -> FundamentalSetApprox:
    """K = J-cells in W whose center orbit stays in W for `horizon` steps;
    K' = J-cells mapping into K that are not themselves in K."""
    if horizon < 1:
        raise ConfigError("horizon must be >= 1")
    grid = W.grid
    if julia is None:
        julia = julia_cells(f, grid)
    elif julia.grid != grid:
        raise ConfigError("julia and W grids differ")

    cloud = postcritical_cloud(f)
    finite = cloud.all_finite()
    if finite.size and not np.all(W.contains(finite)):
        warnings.warn("postcritical cloud is not contained in W; the "
                      "fundamental-set premises are not met", stacklevel=2)

    inf_value, inf_finite = _infinity_args(f)
    jw = julia & W
    k_mask = np.zeros(grid.resolution * grid.resolution, dtype=np.uint8)
    if jw.count:
        pts = jw.centers()
        stays = kernels.orbit_stays(
            f.num.coeffs, f.den.coeffs, pts, grid.lo.real, grid.lo.imag,
            grid.cell, grid.resolution, W.mask, horizon, inf_value, inf_finite)
        flat = jw.mask.reshape(-1).astype(bool)
        k_mask[np.where(flat)[0]] = stays
    K = CellSet(grid, k_mask.reshape(grid.resolution, grid.resolution))

    kp_mask = np.zeros_like(k_mask)
    if julia.count:
        pts = julia.centers()
        img = np.asarray(f.eval_plane(pts), dtype=complex)
        idx = grid.cell_of(img)
        kflat = K.mask.reshape(-1)
        hits = np.zeros(pts.shape, dtype=bool)
        ok = idx >= 0
        hits[ok] = kflat[idx[ok]] != 0
        src = np.where(julia.mask.reshape(-1).astype(bool))[0]
        kp_mask[src[hits]] = 1
    Kprime = CellSet(grid, kp_mask.reshape(grid.resolution, grid.resolution)) - K

    return FundamentalSetApprox(
        K=K, Kprime=Kprime, W=W, horizon=horizon,
        K_empty=K.is_empty(), Kprime_empty=Kprime.is_empty(), julia=julia)


@dataclass(frozen=True)
class PartitionResult:
    layers: tuple[CellSet, ...]
    coverage_fraction: float
    disjoint: bool


def pullback_partition(f: RationalMap, fs: FundamentalSetApprox,
                       depth: int) -> PartitionResult:
    """First-entry decomposition: layer j = J-cells whose center's j-th
    image first lands in a Kprime cell (K-cells excluded)."""
    if depth < 0:
        raise ConfigError("depth must be >= 0")
    grid = fs.W.grid
    julia = fs.julia if fs.julia is not None else julia_cells(f, grid)
    inf_value, inf_finite = _infinity_args(f)

    layers = []
    if julia.count:
        pts = julia.centers()
        first = kernels.orbit_first_entry(
            f.num.coeffs, f.den.coeffs, pts, grid.lo.real, grid.lo.imag,
            grid.cell, grid.resolution, fs.Kprime.mask, depth,
            inf_value, inf_finite)
        src = np.where(julia.mask.reshape(-1).astype(bool))[0]
        for j in range(depth + 1):
            m = np.zeros(grid.resolution * grid.resolution, dtype=np.uint8)
            m[src[first == j]] = 1
            layer = CellSet(grid, m.reshape(grid.resolution, grid.resolution))
            layers.append(layer - fs.K)
    else:
        layers = [grid.empty_region() for _ in range(depth + 1)]

    covered = fs.K
    for layer in layers:
        covered = covered | layer
    denom = max(1, julia.count)
    coverage = (covered & julia).count / denom
    return PartitionResult(tuple(layers), float(coverage), True)


# -- integration schemes ------------------------------------------------------------


@dataclass(frozen=True)
class CellMidpoint:
    poles: tuple = ()


@dataclass(frozen=True)
class MonteCarlo:
    n: int
    seed: int


@dataclass(frozen=True)
class PolarRefined:
    n: int
    seed: int
    poles: tuple = ()


def _region_samples(region: CellSet, rng, n: int) -> np.ndarray:
    grid = region.grid
    marked = np.where(region.mask.reshape(-1).astype(bool))[0]
    pick = marked[rng.integers(marked.size, size=n)]
    ix = pick % grid.resolution
    iy = pick // grid.resolution
    u = rng.random(n)
    v = rng.random(n)
    re = grid.lo.real + (ix + u) * grid.cell
    im = grid.lo.imag + (iy + v) * grid.cell
    return re + 1j * im


def _mc_stats(vals: np.ndarray, weight: float) -> tuple[complex, float]:
    n = vals.size
    est = complex(np.mean(vals) * weight)
    if n < 2:
        return est, float("inf")
    var = (np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1)) / n
    return est, float(np.sqrt(var) * abs(weight))


def integrate(g, region: CellSet, scheme) -> tuple[complex, float]:
    """Area integral of g over a cell region: (estimate, stderr).

    Evaluators must accept complex ndarrays. cell_midpoint is deterministic
    (stderr 0); monte_carlo samples uniformly over the marked cells;
    polar_refined additionally carves disjoint disks around the declared
    poles and samples them in polar coordinates, giving 1/|x-p| integrands
    finite variance.
    """
    if region.is_empty():
        return 0j, 0.0
    grid = region.grid

    if isinstance(scheme, CellMidpoint):
        if scheme.poles:
            inside = region.contains(np.asarray(scheme.poles, dtype=complex))
            if np.any(inside):
                raise PoleInRegion(
                    "declared pole lies inside the region; midpoint rule "
                    "would evaluate next to it")
        vals = np.asarray(g(region.centers()), dtype=complex)
        return complex(vals.sum() * grid.cell_area), 0.0

    if isinstance(scheme, MonteCarlo):
        if scheme.n < 1:
            raise ConfigError("monte_carlo needs n >= 1")
        rng = stream(scheme.seed, 41)
        pts = _region_samples(region, rng, scheme.n)
        vals = np.asarray(g(pts), dtype=complex)
        return _mc_stats(vals, region.area)

    if isinstance(scheme, PolarRefined):
        if scheme.n < 1:
            raise ConfigError("polar_refined needs n >= 1")
        rng = stream(scheme.seed, 43)
        poles = np.asarray(scheme.poles, dtype=complex)
        width = grid.hi.real - grid.lo.real
        # keep only poles near enough to touch the region's box
        keep = []
        for p in poles:
            if (grid.lo.real - 0.3 * width <= p.real <= grid.hi.real + 0.3 * width
                    and grid.lo.imag - 0.3 * width <= p.imag <= grid.hi.imag + 0.3 * width):
                keep.append(p)
        poles = np.asarray(keep, dtype=complex)
        if poles.size == 0:
            return integrate(g, region, MonteCarlo(scheme.n, scheme.seed))

        radii = np.full(poles.size, 0.12 * width)
        for i in range(poles.size):
            for j_ in range(poles.size):
                if i != j_:
                    radii[i] = min(radii[i], 0.45 * abs(poles[i] - poles[j_]))

        n_disk = max(1, scheme.n // (2 * poles.size))
        n_flat = max(1, scheme.n - n_disk * poles.size)

        total = 0j
        var_sum = 0.0
        for p, rho in zip(poles, radii):
            r = rho * rng.random(n_disk)
            th = 2 * np.pi * rng.random(n_disk)
            x = p + r * np.exp(1j * th)
            inside = region.contains(x)
            vals = np.zeros(n_disk, dtype=complex)
            if inside.any():
                vals[inside] = np.asarray(g(x[inside]), dtype=complex)
            vals = vals * r * (2 * np.pi * rho)
            est, err = _mc_stats(vals, 1.0)
            total += est
            if np.isfinite(err):
                var_sum += err * err

        pts = _region_samples(region, rng, n_flat)
        outside = np.ones(n_flat, dtype=bool)
        for p, rho in zip(poles, radii):
            outside &= np.abs(pts - p) > rho
        vals = np.zeros(n_flat, dtype=complex)
        if outside.any():
            vals[outside] = np.asarray(g(pts[outside]), dtype=complex)
        est, err = _mc_stats(vals, region.area)
        total += est
        if np.isfinite(err):
            var_sum += err * err
        return total, float(np.sqrt(var_sum))

    raise ConfigError(f"unknown integration scheme {scheme!r}")
