"""Raster output: Julia-cell pixmaps and line-field segment plots.

Images are built in math orientation (imaginary axis up) and flipped once
at write time, matching the bitmap convention used for cell masks.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError
from .grid import CellSet, Grid
from .pnm import write_ppm

__all__ = [
    "julia_pixmap",
    "linefield_pixmap",
    "write_render",
    "write_sidecar",
]

BACKGROUND = (255, 255, 255)
MARKED = (40, 40, 40)
SEGMENT = (0, 0, 0)
UNDERLAY = (205, 215, 235)

# segments need a few pixels of room to show an angle
MIN_CELL_PX = 5


def julia_pixmap(region: CellSet) -> np.ndarray:
    """(res, res, 3) math-oriented image of a cell mask."""
    res = region.grid.resolution
    img = np.empty((res, res, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    img[region.mask.astype(bool)] = MARKED
    return img


def _draw_segment(img: np.ndarray, r0: int, c0: int, r1: int, c1: int,
                  color) -> None:
    """Bresenham line, endpoints clipped by per-pixel bounds checks."""
    h, w = img.shape[:2]
    dr = abs(r1 - r0)
    dc = abs(c1 - c0)
    sr = 1 if r0 < r1 else -1
    sc = 1 if c0 < c1 else -1
    err = dc - dr
    r, c = r0, c0
    while True:
        if 0 <= r < h and 0 <= c < w:
            img[r, c] = color
        if r == r1 and c == c1:
            break
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr
    return


def linefield_pixmap(grid: Grid, values: np.ndarray, *, cell_px: int = 9,
                     underlay: CellSet | None = None,
                     zero_tol: float = 1e-12) -> np.ndarray:
    """One unoriented direction segment per cell at angle arg(value)/2.

    values is flat (iy*res + ix) or (res, res); cells with |value| below
    zero_tol stay blank. A line field has no arrow, so the segment through
    the cell center represents both directions at once.
    """
    res = grid.resolution
    vals = np.asarray(values, dtype=complex).reshape(res, res)
    if cell_px < MIN_CELL_PX:
        raise ConfigError(f"cell_px must be >= {MIN_CELL_PX}")
    if underlay is not None and underlay.grid.resolution != res:
        raise ConfigError("underlay resolution differs from the render grid")

    side = res * cell_px
    img = np.empty((side, side, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    if underlay is not None:
        cells = np.repeat(np.repeat(underlay.mask.astype(bool), cell_px, 0),
                          cell_px, 1)
        img[cells] = UNDERLAY

    half = (cell_px - 2) / 2.0
    mid = cell_px // 2
    iy, ix = np.nonzero(np.abs(vals) >= zero_tol)
    ang = np.angle(vals[iy, ix]) / 2.0
    for k in range(iy.size):
        r = int(iy[k]) * cell_px + mid
        c = int(ix[k]) * cell_px + mid
        dr = half * np.sin(ang[k])
        dc = half * np.cos(ang[k])
        _draw_segment(img, int(round(r - dr)), int(round(c - dc)),
                      int(round(r + dr)), int(round(c + dc)), SEGMENT)
    return img


def write_render(path, img: np.ndarray) -> None:
    """Flip to row-0-on-top raster order and write a pixmap."""
    write_ppm(path, np.asarray(img)[::-1])


def write_sidecar(path, grid: Grid, extra: dict | None = None) -> None:
    """JSON sidecar recording the box and resolution of a render."""
    payload = {"box": grid.box_tuple(), "resolution": grid.resolution}
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
