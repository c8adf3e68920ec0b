"""Command-line front end: ``qdlab <command> [options]``.

Commands: ``enumerate``, ``verify``, ``gsd``, ``confine``, ``spectrum``,
``wops``, ``fourier``. Model options may also come from a plain
``key=value`` file given with ``--config``; explicit flags win.

Exit codes: 0 success, 1 a physics check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections.abc import Sequence

import numpy as np

from .groups import classify, enumerate_homomorphisms
from .hilbert import OP_TOL
from .models import Family, ModelSpec, solvability_check
from .spectra import (
    CapExceeded,
    ConsistencyError,
    confinement_profile,
    dense_spectrum,
    diagonalize_edge_op,
    gsd_report,
    solve_w_operators,
)

SCHEMA = 1

EXIT_OK = 0
EXIT_PHYSICS = 1
EXIT_CONFIG = 2

_CONFIG_KEYS = {
    "family": str,
    "gauge": int,
    "matter": int,
    "hom": int,
    "theta": str,
    "rows": int,
    "cols": int,
    "genus": int,
    "format": str,
    "tol": float,
    "cap": int,
    "swap": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}

_DEFAULTS = {
    "family": "dual",
    "gauge": 2,
    "matter": 1,
    "hom": 0,
    "theta": None,
    "rows": 2,
    "cols": 2,
    "genus": 1,
    "format": "json",
    "tol": OP_TOL,
    "cap": None,
    "swap": False,
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------------


def _json_value(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(x, (complex, np.complexfloating)):
        return _json_value({"re": float(x.real), "im": float(x.imag)})
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(payload: dict) -> str:
    """JSON with insertion-ordered keys and floats at 17 significant digits."""
    return _json_value(payload)


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def _render(fmt: str, payload: dict, header: list[str], rows: list[list]) -> str:
    if fmt == "json":
        return dumps(payload)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(c) for c in r])
        return buf.getvalue().rstrip("\n")
    cells = [header] + [[_cell(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    spark = payload.get("result", {}).get("sparkline") if isinstance(payload.get("result"), dict) else None
    if spark:
        lines.append(spark)
    return "\n".join(lines)


# ---------------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------------


def read_config(path: str) -> dict:
    """Parse a ``key=value`` file; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["format"] not in ("json", "csv", "table"):
        raise ConfigError(f"unknown format {cfg['format']!r}")
    if cfg["genus"] != 1:
        raise ConfigError("only genus 1 (torus) is supported")
    if cfg["tol"] <= 0:
        raise ConfigError("tolerance must be positive")
    return cfg


def spec_from_config(cfg: dict) -> ModelSpec:
    try:
        family = Family(cfg["family"])
    except ValueError:
        raise ConfigError(f"unknown family {cfg['family']!r}") from None
    try:
        if family is Family.DOUBLE:
            return ModelSpec.double(cfg["gauge"], cfg["rows"], cfg["cols"], swap=cfg["swap"])
        if family is Family.DUAL:
            return ModelSpec.dual(cfg["gauge"], cfg["matter"], cfg["hom"], cfg["rows"], cfg["cols"], swap=cfg["swap"])
        return ModelSpec.vertex(cfg["gauge"], cfg["matter"], cfg["theta"] or "trivial", cfg["rows"], cfg["cols"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _envelope(command: str, spec: ModelSpec | None, result) -> dict:
    out = {"schema": SCHEMA, "command": command}
    if spec is not None:
        out["model"] = spec.as_dict()
    out["result"] = result
    return out


# ---------------------------------------------------------------------------------
# commands: each returns (payload, header, rows, exit code)
# ---------------------------------------------------------------------------------


def cmd_enumerate(N: int, K: int):
    if N < 1 or K < 1:
        raise ConfigError("group orders must be positive")
    header = ["n", "kernel", "image", "cokernel", "class", "descriptor"]
    rows, items = [], []
    for f in enumerate_homomorphisms(K, N):
        c = classify(N, K, f.multiplier)
        rows.append([c.n, c.kernel, c.image, c.cokernel, c.label, c.descriptor])
        items.append(c.as_dict())
    payload = {"schema": SCHEMA, "command": "enumerate", "N": N, "K": K, "result": items}
    return payload, header, rows, EXIT_OK


def cmd_verify(spec: ModelSpec, tol: float):
    rep = solvability_check(spec, tol=tol)
    if rep.error:
        raise ConfigError(rep.error)
    d = rep.as_dict()
    header = ["quantity", "value"]
    rows = [[k, v] for k, v in d.items()]
    return _envelope("verify", spec, d), header, rows, EXIT_OK if rep.ok else EXIT_PHYSICS


def cmd_gsd(spec: ModelSpec, cap: int | None):
    rep = gsd_report(spec, cap)
    d = rep.as_dict()
    header = ["oracle", "formula", "match", "hilbert_dim"]
    rows = [[rep.dimension, rep.formula, rep.match, rep.hilbert_dim]]
    code = EXIT_PHYSICS if rep.match is False else EXIT_OK
    return _envelope("gsd", spec, d), header, rows, code


def cmd_confine(spec: ModelSpec, g: int, max_length: int, kind: str, sparkline: bool):
    if max_length < 1:
        raise ConfigError("max length must be at least 1")
    if max_length >= spec.cols:
        # strings run along +x; an open string must not wrap the torus
        raise ConfigError(f"max length {max_length} needs --cols of at least {max_length + 1}")
    prof = confinement_profile(spec, g, range(1, max_length + 1), kind=kind)
    d = prof.as_dict()
    if sparkline:
        d["sparkline"] = prof.sparkline()
    rows = [[L, e] for L, e in prof.rows()]
    code = EXIT_PHYSICS if any(e < -1e-8 for e in prof.delta_e) else EXIT_OK
    return _envelope("confine", spec, d), ["length", "delta_e"], rows, code


def cmd_spectrum(spec: ModelSpec, count: int, tol: float):
    ev = dense_spectrum(spec)
    levels = []
    for e in ev:
        if levels and abs(e - levels[-1][0]) < max(tol, 1e-8):
            levels[-1][1] += 1
        else:
            levels.append([float(e), 1])
    levels = levels[:count]
    e0 = spec.ground_energy
    d = {
        "ground_energy": e0,
        "levels": [{"energy": e, "multiplicity": m} for e, m in levels],
    }
    code = EXIT_OK if levels and abs(levels[0][0] - e0) < 1e-8 else EXIT_PHYSICS
    return _envelope("spectrum", spec, d), ["energy", "multiplicity"], levels, code


def cmd_wops(spec: ModelSpec, face: int):
    table = solve_w_operators(spec, face)
    entries = [
        {"J": J, "K": Kp, "monomials": [{"a": w.a, "b": w.b, "label": w.label} for w in ws]}
        for (J, Kp), ws in table.entries.items()
    ]
    rows = [[J, Kp, " ".join(w.label for w in ws) or "-"] for (J, Kp), ws in table.entries.items()]
    d = {"face": face, "entries": entries}
    return _envelope("wops", spec, d), ["J", "K", "W"], rows, EXIT_OK


def cmd_fourier(spec: ModelSpec, edges: Sequence[int] | None, tol: float):
    if edges is None:
        edges = range(spec.lattice.n_edges)
    reports = [diagonalize_edge_op(spec, j) for j in edges]
    max_off = max(r.max_offdiag for r in reports)
    max_err = max(r.max_formula_error for r in reports)
    d = {
        "diagonal": bool(max_off < tol),
        "max_offdiag": max_off,
        "max_formula_error": max_err,
        "edges": [r.as_dict() for r in reports],
    }
    rows = [[r.edge, r.diagonal, r.max_offdiag, r.max_formula_error] for r in reports]
    code = EXIT_OK if max_off < tol and max_err < tol else EXIT_PHYSICS
    return _envelope("fourier", spec, d), ["edge", "diagonal", "max_offdiag", "max_formula_error"], rows, code


# ---------------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------------


def _model_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model")
    g.add_argument("--config", help="key=value configuration file")
    g.add_argument("--family", choices=[f.value for f in Family])
    g.add_argument("--gauge", type=int, metavar="N", help="gauge group order")
    g.add_argument("--matter", type=int, metavar="K", help="matter order (K for faces, M for vertices)")
    g.add_argument("--hom", type=int, metavar="n", help="homomorphism multiplier")
    g.add_argument("--theta", help="vertex matter action: trivial, regular or blocks:B,F")
    g.add_argument("--rows", type=int, metavar="L1")
    g.add_argument("--cols", type=int, metavar="L2")
    g.add_argument("--genus", type=int, help="reserved; only 1 is supported")
    g.add_argument("--swap", action="store_const", const=True, help="mirrored p1/p2 convention")
    o = p.add_argument_group("output")
    o.add_argument("--format", choices=["json", "csv", "table"])
    o.add_argument("--tol", type=float)
    o.add_argument("--cap", type=int, help="dimension cap (default QDLAB_CAP or 2000000)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdlab", description="Quantum double models with matter.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _model_options()

    e = sub.add_parser("enumerate", parents=[common], help="list homomorphisms Z_K -> Z_N")
    e.set_defaults(handler="enumerate")
    sub.add_parser("verify", parents=[common], help="certify projectors and commutation").set_defaults(handler="verify")
    sub.add_parser("gsd", parents=[common], help="ground-space dimension vs closed formula").set_defaults(handler="gsd")
    c = sub.add_parser("confine", parents=[common], help="string energy profile")
    c.add_argument("--charge", "-g", type=int, default=1, dest="charge")
    c.add_argument("--max-length", type=int, default=3)
    c.add_argument("--kind", choices=["z", "x"], default="z")
    c.add_argument("--sparkline", action="store_true")
    c.set_defaults(handler="confine")
    s = sub.add_parser("spectrum", parents=[common], help="lowest levels by dense diagonalization")
    s.add_argument("--levels", type=int, default=5)
    s.set_defaults(handler="spectrum")
    w = sub.add_parser("wops", parents=[common], help="face W-operator table")
    w.add_argument("--face", type=int, default=0)
    w.set_defaults(handler="wops")
    f = sub.add_parser("fourier", parents=[common], help="edge term in the character basis")
    f.add_argument("--edge", type=int, action="append")
    f.set_defaults(handler="fourier")
    return parser


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve(args)
        if args.handler == "enumerate":
            res = cmd_enumerate(cfg["gauge"], cfg["matter"])
        else:
            spec = spec_from_config(cfg)
            if args.handler == "verify":
                res = cmd_verify(spec, cfg["tol"])
            elif args.handler == "gsd":
                res = cmd_gsd(spec, cfg["cap"])
            elif args.handler == "confine":
                res = cmd_confine(spec, args.charge, args.max_length, args.kind, args.sparkline)
            elif args.handler == "spectrum":
                res = cmd_spectrum(spec, args.levels, cfg["tol"])
            elif args.handler == "wops":
                res = cmd_wops(spec, args.face)
            else:
                res = cmd_fourier(spec, args.edge, cfg["tol"])
    except (ConfigError, CapExceeded, IndexError) as exc:
        print(f"qdlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConsistencyError as exc:
        print(f"qdlab: check failed: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ValueError as exc:
        print(f"qdlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    payload, header, rows, code = res
    print(_render(cfg["format"], payload, header, rows), file=out)
    return code


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
