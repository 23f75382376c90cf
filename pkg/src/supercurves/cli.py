"""Command-line front end: verify, construct, convergence, action."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import action as act
from . import fields as fl
from .config import ConfigError, RunConfig
from .fieldio import FieldIOError, read_superfield, write_superfield
from .suite import (CHECKS, CONVERGENCE_CHECKS, UnsupportedConfiguration, check_construction,
                    construct_supercurve, convergence_study, run_suite)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _dump(obj, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def _load_config(path) -> RunConfig:
    return RunConfig() if path is None else RunConfig.load(path)


def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    checks = [c.strip() for c in args.checks.split(",") if c.strip()] if args.checks else None
    report = run_suite(cfg, checks)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "suite_report.json", "w", encoding="utf-8") as fh:
        _dump(report, fh)
    _dump(report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_construct(args) -> int:
    cfg = _load_config(args.config)
    Phi, info = construct_supercurve(cfg)
    rep = check_construction(cfg)
    extra = {"target": cfg.to_dict()["target"], "lambda": cfg.to_dict()["lam"],
             "residuals": rep["residuals"], "el_residuals": rep["el_residuals"],
             "degenerate": info["degenerate"]}
    path = write_superfield(args.out, Phi, extra)
    rep["manifest"] = str(path)
    _dump(rep)
    return EXIT_OK if rep["pass"] else EXIT_FAIL


def cmd_convergence(args) -> int:
    cfg = _load_config(args.config)
    grids = [int(g) for g in args.grids.split(",")]
    res = convergence_study(cfg, args.check, grids, args.scheme)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "h", "defect"])
    for r in res["rows"]:
        w.writerow([r["n"], repr(r["h"]), repr(r["defect"])])
    w.writerow(["order", res["order"], "flagged" if res["flagged"] else "ok"])
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_FAIL if res["flagged"] else EXIT_OK


def cmd_action(args) -> int:
    cfg = _load_config(args.config)
    sheet, target = cfg.make_sheet(), cfg.make_target()
    Phi = read_superfield(args.fields, sheet, target)
    a1 = act.action_A1(Phi)
    out = {"A": act.harmonic_action(Phi.phi),
           "A1": {"body": a1.body, "soul": a1.soul},
           "A2": act.action_A2(Phi.phi, sheet.to_eplus(Phi.psi1))}
    if not np.any(Phi.psi2) and not np.any(Phi.xi):
        out["compare_A1_A2"] = act.compare_A1_A2(Phi, cfg.tolerance("a1_a2_comparison"))
    _dump(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supercurve",
                                description="Numerical checks for holomorphic supercurves on a torus.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification checks")
    v.add_argument("--config")
    v.add_argument("--checks", help="comma-separated subset of: " + ", ".join(CHECKS))
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("construct", help="build the flat-torus example and write its fields")
    c.add_argument("--config")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_construct)

    k = sub.add_parser("convergence", help="defect versus grid size")
    k.add_argument("--check", required=True, choices=CONVERGENCE_CHECKS)
    k.add_argument("--grids", default="16,32,64")
    k.add_argument("--config")
    k.add_argument("--scheme", choices=("spectral", "central2", "central4"))
    k.add_argument("--out", help="also write the CSV here")
    k.set_defaults(func=cmd_convergence)

    a = sub.add_parser("action", help="evaluate A, A1, A2 on stored fields")
    a.add_argument("--config")
    a.add_argument("--fields", required=True)
    a.set_defaults(func=cmd_action)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnsupportedConfiguration) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except FieldIOError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
