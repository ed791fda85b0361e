"""Command-line surface.

Every run echoes its fully resolved configuration (defaults filled in,
seed included) as the first JSON record on stdout, so a printed config can
be replayed verbatim. Numeric outputs use round-trip decimal formatting;
file outputs are written to a temporary name and renamed into place.

Exit codes: 0 success, 1 failed verification or computation, 2 bad
configuration or schema.
"""

from __future__ import annotations

import json
import os
import sys

import numpy as np

from .errors import ConfigError, LinefieldError
from .fields import (
    integral_diagnostics,
    lattes_field,
    load_sampled_field,
    sigma_grid,
)
from .grid import CellSet, Grid, fundamental_set, julia_cells
from .poly import roots
from .ratmap import RationalMap, load_map
from .render import julia_pixmap, linefield_pixmap, write_render, write_sidecar
from .residues import IDENTITIES, verify_identity
from .transfer import ResolventControl, resolvent, test_functions

__all__ = ["main"]

CSV_HEADER = ["n", "int_abs_r", "int_sigma_psi_re", "int_sigma_psi_im",
              "stderr", "depth"]


# -- value parsing -------------------------------------------------------------------


def _parse_complex(s: str) -> complex:
    """a+bi with either i or j, or a plain real."""
    t = s.strip().replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise ConfigError(f"cannot parse complex number {s!r}") from None


def _parse_box(s: str) -> tuple[complex, complex]:
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 4:
        raise ConfigError('box must be "re0,im0,re1,im1"')
    try:
        v = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"cannot parse box {s!r}") from None
    return complex(v[0], v[1]), complex(v[2], v[3])


def _parse_disks(s: str) -> list[tuple[complex, float]]:
    """center:radius pairs separated by semicolons."""
    out: list[tuple[complex, float]] = []
    for item in s.split(";"):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigError(f"disk {item!r} is not center:radius")
        ctext, rtext = item.rsplit(":", 1)
        try:
            r = float(rtext)
        except ValueError:
            raise ConfigError(f"bad disk radius {rtext!r}") from None
        if r <= 0:
            raise ConfigError("disk radius must be positive")
        out.append((_parse_complex(ctext), r))
    if not out:
        raise ConfigError("no disks given")
    return out


def _parse_identity(s: str) -> str:
    if s != "all" and s not in IDENTITIES:
        raise ConfigError(
            f"unknown identity {s!r}; choose from {IDENTITIES} or 'all'")
    return s


def _parse_field_spec(s: str) -> tuple[str, str]:
    if s == "lattes":
        return "lattes", ""
    if s.startswith("sigma:"):
        return "sigma", s[len("sigma:"):]
    if s.startswith("file:"):
        return "file", s[len("file:"):]
    raise ConfigError(
        f"field must be sigma:PSI_INDEX, lattes, or file:PATH, got {s!r}")


_CONVERTERS = {
    "str": str,
    "int": int,
    "float": float,
    "complex": _parse_complex,
    "identity": _parse_identity,
}


# -- schemas -------------------------------------------------------------------------

# key -> (converter, default); default None means required
SCHEMAS: dict[str, dict[str, tuple[str, object]]] = {
    "verify": {
        "map": ("str", None),
        "identity": ("identity", None),
        "samples": ("int", 100),
        "tol": ("float", 1e-8),
        "seed": ("int", 0),
        "nodes": ("int", 512),
        "mc-samples": ("int", 20000),
        "workers": ("int", 1),
    },
    "resolvent": {
        "map": ("str", None),
        "psi": ("int", 0),
        "point": ("complex", None),
        "tol": ("float", 1e-9),
        "max-depth": ("int", 24),
        "node-cap": ("int", 1 << 22),
        "seed": ("int", 0),
    },
    "render-julia": {
        "map": ("str", None),
        "box": ("str", None),
        "res": ("int", 512),
        "out": ("str", None),
        "iter-cap": ("int", 256),
        "seed": ("int", 0),
    },
    "render-linefield": {
        "map": ("str", None),
        "field": ("str", None),
        "box": ("str", ""),
        "res": ("int", 128),
        "out": ("str", None),
        "cell-px": ("int", 9),
        "underlay": ("int", 1),
        "tol": ("float", 1e-6),
        "max-depth": ("int", 20),
        "node-cap": ("int", 1 << 18),
        "seed": ("int", 0),
    },
    "diagnose": {
        "map": ("str", None),
        "psi": ("int", 0),
        "sets": ("str", None),
        "depth": ("int", None),
        "box": ("str", None),
        "res": ("int", 512),
        "horizon": ("int", 1),
        "shrink": ("float", 1.0),
        "stages": ("int", 1),
        "mc-n": ("int", 20000),
        "tol": ("float", 1e-4),
        "max-depth": ("int", 16),
        "node-cap": ("int", 1 << 17),
        "out": ("str", None),
        "seed": ("int", 0),
    },
    "lattes-check": {
        "map": ("str", None),
        "seed": ("int", 0),
    },
    "fundamental-set": {
        "map": ("str", None),
        "box": ("str", None),
        "res": ("int", 512),
        "disks": ("str", None),
        "horizon": ("int", None),
        "iter-cap": ("int", 256),
        "out": ("str", ""),
        "seed": ("int", 0),
    },
}


def _read_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; # starts a comment."""
    table: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        table[key.strip()] = value.strip()
    return table


def _resolve(command: str, config_path: str | None,
             flags: dict[str, str]) -> dict:
    """Merge flags over config-file entries over defaults, typed."""
    schema = SCHEMAS[command]
    raw: dict[str, str] = {}
    if config_path:
        for key, value in _read_config_file(config_path).items():
            if key == "command":
                if value != command:
                    raise ConfigError(
                        f"config file is for {value!r}, not {command!r}")
                continue
            if key not in schema:
                raise ConfigError(f"unknown config key {key!r} for {command}")
            raw[key] = value
    raw.update(flags)

    cfg: dict[str, object] = {}
    for key, (conv, default) in schema.items():
        if key in raw:
            try:
                cfg[key] = _CONVERTERS[conv](raw[key])
            except (ValueError, TypeError):
                raise ConfigError(
                    f"bad value {raw[key]!r} for --{key}") from None
        elif default is None:
            raise ConfigError(f"--{key} is required for {command}")
        else:
            cfg[key] = default
    return cfg


def _echo_config(command: str, cfg: dict) -> None:
    record: dict[str, object] = {"command": command}
    for key, value in cfg.items():
        if isinstance(value, complex):
            record[key] = [value.real, value.imag]
        else:
            record[key] = value
    print(json.dumps(record, sort_keys=True))


def _emit(record: dict) -> None:
    print(json.dumps(record, sort_keys=True))


def _cnum(v: complex) -> list[float]:
    return [float(v.real), float(v.imag)]


def _atomic_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_file(path: str, writer) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    writer(tmp)
    os.replace(tmp, path)


def _sidecar_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".json"


def _load(cfg: dict) -> RationalMap:
    try:
        return load_map(cfg["map"])
    except OSError as exc:
        raise ConfigError(f"cannot read map file: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"bad map file: {exc}") from None


def _catalog_psi(f: RationalMap, index: int):
    catalog = test_functions(f)
    if not catalog:
        raise ConfigError("this map has an empty test-function catalog")
    if not 0 <= index < len(catalog):
        raise ConfigError(
            f"--psi {index} out of range; catalog has {len(catalog)} entries")
    return catalog[index]


def _grid_from(cfg: dict) -> Grid:
    lo, hi = _parse_box(cfg["box"])
    return Grid(lo, hi, cfg["res"])


# -- subcommands ---------------------------------------------------------------------


def _cmd_verify(cfg: dict) -> int:
    f = _load(cfg)
    if cfg["identity"] == "all":
        if f.kind is None:
            raise ConfigError("--identity all needs a classified map kind")
        names = [n for n in IDENTITIES
                 if (n != "lemma_T" or f.kind != "sphere")
                 and (n != "lemma_Tc" or f.kind == "sphere")]
    else:
        names = [cfg["identity"]]
    ok = True
    for name in names:
        report = verify_identity(
            f, name, cfg["samples"], cfg["tol"], cfg["seed"],
            nodes=cfg["nodes"], workers=cfg["workers"],
            mc_samples=cfg["mc-samples"])
        _emit(report.as_dict())
        ok = ok and report.passed
    return 0 if ok else 1


def _cmd_resolvent(cfg: dict) -> int:
    f = _load(cfg)
    psi = _catalog_psi(f, cfg["psi"])
    ctrl = ResolventControl(tol=cfg["tol"], max_depth=cfg["max-depth"],
                            node_cap=cfg["node-cap"])
    ev = resolvent(f, psi, cfg["point"], ctrl)
    _emit({
        "value": _cnum(ev.value),
        "abs_value": ev.abs_value,
        "depth_used": ev.depth_used,
        "tail_estimate": ev.tail_estimate,
        "in_domain": ev.in_domain,
        "psi": psi.label(),
    })
    return 0


def _cmd_render_julia(cfg: dict) -> int:
    f = _load(cfg)
    grid = _grid_from(cfg)
    region = julia_cells(f, grid, iter_cap=cfg["iter-cap"], seed=cfg["seed"])
    _atomic_file(cfg["out"], lambda p: write_render(p, julia_pixmap(region)))
    _atomic_file(_sidecar_path(cfg["out"]),
                 lambda p: write_sidecar(p, grid, {"cells": region.count}))
    _emit({"out": cfg["out"], "cells": region.count})
    return 0


def _cmd_render_linefield(cfg: dict) -> int:
    f = _load(cfg)
    mode, arg = _parse_field_spec(cfg["field"])

    if mode == "file":
        sampled = load_sampled_field(arg)
        grid = sampled.grid
        values = sampled.values
    else:
        if not cfg["box"]:
            raise ConfigError(f"--box is required for --field {cfg['field']}")
        grid = _grid_from(cfg)
        if mode == "lattes":
            mu = lattes_field(f).mu
            values = np.asarray(mu.evaluate(grid.centers()),
                                dtype=complex).reshape(grid.resolution, -1)
        else:
            try:
                index = int(arg)
            except ValueError:
                raise ConfigError(f"bad psi index {arg!r}") from None
            psi = _catalog_psi(f, index)
            ctrl = ResolventControl(tol=cfg["tol"], max_depth=cfg["max-depth"],
                                    node_cap=cfg["node-cap"])
            values = sigma_grid(f, psi, grid, ctrl)

    under = julia_cells(f, grid, seed=cfg["seed"]) if cfg["underlay"] else None
    img = linefield_pixmap(grid, values, cell_px=cfg["cell-px"],
                           underlay=under)
    _atomic_file(cfg["out"], lambda p: write_render(p, img))
    drawn = int(np.count_nonzero(np.abs(values) >= 1e-12))
    _atomic_file(_sidecar_path(cfg["out"]),
                 lambda p: write_sidecar(p, grid, {"segments": drawn}))
    _emit({"out": cfg["out"], "segments": drawn})
    return 0


def _cmd_diagnose(cfg: dict) -> int:
    f = _load(cfg)
    psi = _catalog_psi(f, cfg["psi"])
    if cfg["depth"] < 0:
        raise ConfigError("--depth must be >= 0")
    if cfg["stages"] < 1:
        raise ConfigError("--stages must be >= 1")
    if not 0 < cfg["shrink"] <= 1:
        raise ConfigError("--shrink must be in (0, 1]")
    grid = _grid_from(cfg)
    disks = _parse_disks(cfg["sets"])
    julia = julia_cells(f, grid, seed=cfg["seed"])
    fs_seq = []
    for stage in range(cfg["stages"]):
        scale = cfg["shrink"] ** stage
        W = CellSet.from_disks(grid, [(c, r * scale) for c, r in disks])
        fs_seq.append(fundamental_set(f, W, cfg["horizon"], julia=julia))

    ctrl = ResolventControl(tol=cfg["tol"], max_depth=cfg["max-depth"],
                            node_cap=cfg["node-cap"])
    rows = integral_diagnostics(f, psi, fs_seq, cfg["depth"],
                                mc_n=cfg["mc-n"], seed=cfg["seed"], ctrl=ctrl)

    lines = [",".join(CSV_HEADER)]
    for row in rows:
        lines.append(",".join([
            str(row.n),
            format(row.int_abs_r, ".17g"),
            format(row.int_sigma_psi.real, ".17g"),
            format(row.int_sigma_psi.imag, ".17g"),
            format(row.stderr, ".17g"),
            str(row.depth),
        ]))
        _emit({
            "n": row.n,
            "int_abs_r": row.int_abs_r,
            "int_sigma_psi": _cnum(row.int_sigma_psi),
            "stderr": row.stderr,
            "depth": row.depth,
            "tail_bound": row.tail_bound,
        })
    _atomic_text(cfg["out"], "\n".join(lines) + "\n")
    return 0


def _cmd_lattes_check(cfg: dict) -> int:
    f = _load(cfg)
    result = lattes_field(f)
    _emit({
        "lambda": result.lam,
        "residual": result.residual,
        "poles": [_cnum(p) for p, _ in roots(result.mu.q_den)],
    })
    return 0


def _cmd_fundamental_set(cfg: dict) -> int:
    f = _load(cfg)
    if cfg["horizon"] < 1:
        raise ConfigError("--horizon must be >= 1")
    grid = _grid_from(cfg)
    disks = _parse_disks(cfg["disks"])
    julia = julia_cells(f, grid, iter_cap=cfg["iter-cap"], seed=cfg["seed"])
    W = CellSet.from_disks(grid, disks)
    fs = fundamental_set(f, W, cfg["horizon"], julia=julia)

    if cfg["out"]:
        for tag, region in (("K", fs.K), ("Kprime", fs.Kprime),
                            ("julia", julia)):
            base = f"{cfg['out']}.{tag}.pbm"
            tmp = f"{base}.tmp{os.getpid()}"
            region.save(tmp)
            os.replace(tmp, base)
            os.replace(tmp + ".json", base + ".json")
    _emit({
        "K_cells": fs.K.count,
        "Kprime_cells": fs.Kprime.count,
        "K_empty": fs.K_empty,
        "Kprime_empty": fs.Kprime_empty,
        "julia_cells": julia.count,
        "horizon": fs.horizon,
    })
    return 0


_HANDLERS = {
    "verify": _cmd_verify,
    "resolvent": _cmd_resolvent,
    "render-julia": _cmd_render_julia,
    "render-linefield": _cmd_render_linefield,
    "diagnose": _cmd_diagnose,
    "lattes-check": _cmd_lattes_check,
    "fundamental-set": _cmd_fundamental_set,
}


def _usage(command: str | None = None) -> str:
    if command is None:
        names = " | ".join(SCHEMAS)
        return (f"usage: linefield {{{names}}} [--key value ...]\n"
                "Flag values may also come from --config FILE "
                "(flat key=value lines).")
    schema = SCHEMAS[command]
    parts = []
    for key, (conv, default) in schema.items():
        if default is None:
            parts.append(f"--{key} {conv.upper()}")
        else:
            parts.append(f"[--{key} {conv.upper()}={default}]")
    return f"usage: linefield {command} " + " ".join(parts) + " [--config FILE]"


class _HelpRequested(Exception):
    pass


def _parse_argv(argv: list[str]) -> tuple[str, str | None, dict[str, str]]:
    """Split argv into (command, config path, raw flag table).

    Values are taken verbatim (so negative coordinates survive); both
    `--key value` and `--key=value` spellings work. Unknown flags are
    schema errors.
    """
    if argv and argv[0] in ("-h", "--help"):
        raise _HelpRequested
    if not argv:
        raise ConfigError("missing command")
    command = argv[0]
    if command not in SCHEMAS:
        raise ConfigError(
            f"unknown command {command!r}; choose from {', '.join(SCHEMAS)}")
    schema = SCHEMAS[command]
    flags: dict[str, str] = {}
    config_path: str | None = None
    i = 1
    while i < len(argv):
        tok = argv[i]
        if tok in ("-h", "--help"):
            raise _HelpRequested(command)
        if not tok.startswith("--"):
            raise ConfigError(f"expected a --flag, got {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(argv):
                raise ConfigError(f"--{key} needs a value")
            value = argv[i + 1]
            i += 2
        if key == "config":
            config_path = value
        elif key in schema:
            flags[key] = value
        else:
            raise ConfigError(f"unknown flag --{key} for {command}")
    return command, config_path, flags


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        command, config_path, flags = _parse_argv(list(argv))
        cfg = _resolve(command, config_path, flags)
    except _HelpRequested as exc:
        print(_usage(str(exc) or None))
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(_usage(), file=sys.stderr)
        return 2
    _echo_config(command, cfg)
    try:
        return _HANDLERS[command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LinefieldError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return 1


if __name__ == "__main__":
    sys.exit(main())
