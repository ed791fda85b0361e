"""Minimal netpbm writers and readers (P4 bitmap, P5 graymap, P6 pixmap).

Arrays are indexed [row, col] with row 0 at the TOP of the image; callers
working in math coordinates (y increasing upward) flip before writing.
"""

from __future__ import annotations

import numpy as np

__all__ = ["write_pbm", "read_pbm", "write_pgm", "write_ppm"]


def write_pbm(path, bits: np.ndarray) -> None:
    """1-bit portable bitmap, P4 (packed). Nonzero = black."""
    arr = (np.asarray(bits) != 0).astype(np.uint8)
    if arr.ndim != 2:
        raise ValueError("bitmap must be 2-d")
    h, w = arr.shape
    packed = np.packbits(arr, axis=1)
    with open(path, "wb") as fh:
        fh.write(f"P4\n{w} {h}\n".encode("ascii"))
        fh.write(packed.tobytes())


def read_pbm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P4"):
        raise ValueError("not a P4 bitmap")
    # header: magic, whitespace/comments, width, height, single whitespace
    pos = 2
    fields: list[int] = []
    while len(fields) < 2:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1
    w, h = fields
    row_bytes = (w + 7) // 8
    raw = np.frombuffer(data[pos : pos + row_bytes * h], dtype=np.uint8)
    bits = np.unpackbits(raw.reshape(h, row_bytes), axis=1)[:, :w]
    return bits.astype(np.uint8)


def write_pgm(path, gray: np.ndarray) -> None:
    arr = np.asarray(gray, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError("graymap must be 2-d")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def write_ppm(path, rgb: np.ndarray) -> None:
    arr = np.asarray(rgb, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("pixmap must be (h, w, 3)")
    h, w, _ = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())
