"""Command-line entry point: ``colvar classify|scenario|suite``.

Exit codes: 0 pass, 2 classification surprise, 3 verdict failure, 64 usage, 73 I/O.
"""

from __future__ import annotations

import argparse
import inspect
import json
import math
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .asymptotics import M_MAX, NON_MODERATE, classify
from .nets import GenNumber, GridNet, NetError, dumps, make_eps_grid, read_csv

EXIT_OK, EXIT_SURPRISE, EXIT_VERDICT, EXIT_USAGE, EXIT_IO = 0, 2, 3, 64, 73


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"colvar: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="colvar", description="Generalized-function calculus of variations toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON config file (strict schema)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--eps-min", type=float)
        sp.add_argument("--eps-max", type=float)
        sp.add_argument("--eps-count", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--m-max", type=int, help="negligibility exponent cap")

    c = sub.add_parser("classify", help="classify a net from CSV or a builtin name")
    c.add_argument("input", nargs="?", help="CSV path or builtin: " + ", ".join(BUILTINS))
    common(c)
    s = sub.add_parser("scenario", help="run one model problem")
    s.add_argument("name")
    common(s)
    u = sub.add_parser("suite", help="run the acceptance suite")
    common(u)
    return p


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------


def _reject_constant(name):
    raise UsageError(f"non-finite value {name} in config")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf8") as f:
            text = f.read()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    _check_finite(cfg)
    return cfg


def _check_finite(o, where="config"):
    if isinstance(o, float) and not math.isfinite(o):
        raise UsageError(f"non-finite value in {where}")
    if isinstance(o, dict):
        for k, v in o.items():
            _check_finite(v, f"{where}.{k}")
    if isinstance(o, list):
        for v in o:
            _check_finite(v, where)


def _check_keys(cfg: dict, allowed, what: str):
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise UsageError(f"unknown {what} config keys: {', '.join(unknown)}")


GRID_KEYS = ("eps_min", "eps_max", "eps_count")


def _grid_overrides(args, cfg: dict) -> dict:
    out = {k: cfg[k] for k in GRID_KEYS if k in cfg}
    for k in GRID_KEYS:
        v = getattr(args, k)
        if v is not None:
            out[k] = v
    return out


def _make_grid(overrides: dict, default=(1e-3, 1e-1, 7)):
    if not overrides:
        return None
    try:
        return make_eps_grid(float(overrides.get("eps_min", default[0])), float(overrides.get("eps_max", default[1])),
                             int(overrides.get("eps_count", default[2])))
    except (NetError, TypeError, ValueError) as exc:
        raise UsageError(f"bad eps grid: {exc}") from exc


def _prepare_out(path: str | None, default: str) -> Path:
    out = Path(path or default)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    return out


def _write(out: Path, files: dict):
    for name, text in files.items():
        with open(out / name, "w", encoding="utf8", newline="") as f:
            f.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

BUILTINS = {
    "eps_squared": lambda e: e**2,
    "exp_neg_inv": lambda e: np.exp(-1.0 / e),
    "inv_eps": lambda e: 1.0 / e,
    "exp_inv_sqrt": lambda e: np.exp(1.0 / np.sqrt(e)),
}


def cmd_classify(args) -> int:
    cfg = load_config(args.config)
    _check_keys(cfg, ("input", "m_max") + GRID_KEYS, "classify")
    src = args.input or cfg.get("input")
    if not src:
        raise UsageError("classify needs an input (CSV path or builtin name)")
    m_max = args.m_max if args.m_max is not None else int(cfg.get("m_max", M_MAX))
    if m_max != M_MAX:
        print(f"warning: config drift: m_max={m_max} differs from the default {M_MAX}", file=sys.stderr)
    if src in BUILTINS:
        grid = _make_grid(_grid_overrides(args, cfg) or {"eps_min": 1e-4, "eps_max": 1e-1, "eps_count": 10})
        try:
            net = GenNumber(grid, np.array([BUILTINS[src](float(e)) for e in grid.values]))
        except NetError as exc:
            raise UsageError(str(exc)) from exc
        provenance = f"builtin:{src}"
    else:
        try:
            with open(src, encoding="utf8") as f:
                text = f.read()
        except OSError as exc:
            raise UsageError(f"cannot read input: {exc}") from exc
        try:
            net = read_csv(text)
        except NetError as exc:
            raise UsageError(str(exc)) from exc
        provenance = f"csv:{src}"
    rep = classify(net, m_max=m_max)
    doc = {"input": provenance, "m_max": m_max, "report": rep.to_dict(),
           "kind": "GridNet" if isinstance(net, GridNet) else "GenNumber"}
    text = dumps(doc)
    sys.stdout.write(text)
    if args.out:
        _write(_prepare_out(args.out, "."), {"result.json": text})
    return EXIT_SURPRISE if rep.cls == NON_MODERATE else EXIT_OK


def _coerce(value, default):
    if isinstance(default, tuple) and isinstance(value, list):
        return tuple(value)
    return value


def cmd_scenario(args) -> int:
    from .scenarios import SCENARIOS

    if args.name not in SCENARIOS:
        raise UsageError(f"unknown scenario {args.name!r}; choose from {', '.join(SCENARIOS)}")
    fn = SCENARIOS[args.name]
    params = inspect.signature(fn).parameters
    allowed = [k for k in params if k not in ("grid", "delta", "mollifier")] + list(GRID_KEYS) + ["seed"]
    cfg = load_config(args.config)
    _check_keys(cfg, allowed, args.name)
    kwargs = {k: _coerce(v, params[k].default) for k, v in cfg.items() if k in params}
    grid = _make_grid(_grid_overrides(args, cfg))
    if grid is not None:
        kwargs["grid"] = grid
    try:
        res = fn(**kwargs)
    except NetError as exc:
        print(f"{args.name}: FAIL ({type(exc).__name__}: {exc})", file=sys.stderr)
        return EXIT_VERDICT
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad scenario parameters: {exc}") from exc
    seed = args.seed if args.seed is not None else cfg.get("seed")
    doc = res.to_dict()
    doc["seed"] = seed
    out = _prepare_out(args.out, os.path.join("colvar_out", args.name))
    files = {"result.json": dumps(doc)}
    files.update(res.csv_files())
    _write(out, files)
    print(f"{args.name}: {'pass' if res.passed else 'FAIL'} -> {out}")
    for k, v in res.checks.items():
        print(f"  {k}: {'pass' if v else 'FAIL'}")
    return EXIT_OK if res.passed else EXIT_VERDICT


def cmd_suite(args) -> int:
    from .suite import SuiteConfig, run_suite

    cfg = load_config(args.config)
    names = [f.name for f in fields(SuiteConfig)]
    _check_keys(cfg, names, "suite")
    merged = dict(cfg)
    for k in names:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    try:
        sc = SuiteConfig(**merged)
        sc.grid()
    except (NetError, TypeError, ValueError) as exc:
        raise UsageError(f"bad suite config: {exc}") from exc
    out = _prepare_out(args.out, os.path.join("colvar_out", "suite"))
    for w in sc.warnings():
        print(f"warning: {w}", file=sys.stderr)
    doc, timings = run_suite(sc)
    _write(out, {"result.json": dumps(doc), "timings.json": dumps(timings)})
    for r in doc["criteria"]:
        print(f"criterion {r['id']:2d} {'PASS' if r['passed'] else 'FAIL'}  {r['name']}")
    print(f"wall time {timings['total_seconds']:.1f} s -> {out}")
    return EXIT_OK if doc["passed"] else EXIT_VERDICT


COMMANDS = {"classify": cmd_classify, "scenario": cmd_scenario, "suite": cmd_suite}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"colvar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"colvar: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
