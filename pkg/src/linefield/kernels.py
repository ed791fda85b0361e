"""Hot-kernel dispatch: compiled lane when available, numpy lane otherwise.

Set LINEFIELD_KERNELS=numpy or LINEFIELD_KERNELS=cython to force a lane;
forcing cython raises if the extension did not build.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_np

_choice = os.environ.get("LINEFIELD_KERNELS", "").strip().lower()

if _choice not in ("", "numpy", "cython"):
    raise ImportError(f"LINEFIELD_KERNELS must be 'numpy' or 'cython', got {_choice!r}")

if _choice == "numpy":
    _impl = _kernels_np
    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        _impl = _kernels_np
        BACKEND = "numpy"

poly_escape = _impl.poly_escape
quad_resolvent = _impl.quad_resolvent
orbit_first_entry = _impl.orbit_first_entry
orbit_stays = _impl.orbit_stays


def distance_estimate(times: np.ndarray, zabs2: np.ndarray, dzabs2: np.ndarray,
                      dzexp: np.ndarray) -> np.ndarray:
    """Exterior distance bound |z| log|z| / |z'| from raw escape data.

    Entries that never escaped (time < 0) get +inf. Computed here, outside
    the lanes, so both backends share one rounding path.
    """
    times = np.asarray(times)
    zabs2 = np.asarray(zabs2, dtype=np.float64)
    dzabs2 = np.asarray(dzabs2, dtype=np.float64)
    dzexp = np.asarray(dzexp, dtype=np.int64)
    out = np.full(times.shape, np.inf, dtype=np.float64)
    esc = times >= 0
    if not esc.any():
        return out
    za = np.sqrt(zabs2[esc])
    dza = np.sqrt(dzabs2[esc])
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        scale = np.power(_kernels_np._DZ_RENORM, dzexp[esc].astype(np.float64))
        b = za * np.log(za) / (dza * scale)
    b[~np.isfinite(b)] = 0.0
    out[esc] = b
    return out
