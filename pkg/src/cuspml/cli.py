"""Command-line driver: cuspml <experiment> [--config file] [--preset name] [--out dir] [--seed n]."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, build_config, criterion_params, selected
from .experiments import EXPERIMENTS, SELF_TEST, RunContext, run_criterion
from .manifest import emit_manifest
from .special import BudgetError

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("cuspml")


def _plain(x):
    """JSON/CSV-safe value with a fixed textual form."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    return x if x is None or isinstance(x, str) else str(x)


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else str(v)


def write_csv(path, rows, seed):
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["seed"] + keys)
        for r in rows:
            pr = _plain(r)
            w.writerow([seed] + [_cell(pr.get(k)) for k in keys])


def run(cfg, out=None):
    """Execute the selected criteria of a validated config; returns (exit code, summary dict)."""
    out = Path(out or cfg.get("out") or f"cuspml-out/{cfg['experiment']}")
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(seed=cfg["seed"])
    entries = []
    for n in selected(cfg):
        params = criterion_params(cfg, n)
        np.random.seed(cfg["seed"])
        res = run_criterion(n, params, ctx)
        name = f"criterion_{n:02d}_{res.name}.csv"
        write_csv(out / name, res.rows, cfg["seed"])
        entries.append({"check": res.name, "criterion": n, "params": _plain(params), "rows": _plain(res.rows),
                        "summary": _plain(res.summary), "trend_pass": bool(res.passed), "csv": name})
    ok = all(e["trend_pass"] for e in entries)
    summary = {"experiment": cfg["experiment"], "seed": cfg["seed"], "all_pass": ok, "criteria": entries}
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return (EXIT_OK if ok else EXIT_FAIL), summary


def _parser():
    ap = argparse.ArgumentParser(prog="cuspml", description="Desk-scale checks of cusp pseudodifferential calculus, "
                                 "Egorov propagation and Eisenstein Wigner distributions.")
    ap.add_argument("experiment", choices=sorted(EXPERIMENTS) + ["manifest"])
    ap.add_argument("--config", type=Path, help="JSON file merged over the preset")
    ap.add_argument("--preset", default="desk")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--criteria", help="comma-separated criterion numbers to run")
    ap.add_argument("--self-test", action="store_true", help="fast identity checks only")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["run"]:
        argv = argv[1:]
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.experiment == "manifest":
        text = json.dumps(emit_manifest(), indent=1) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    select = None
    if args.self_test:
        if args.experiment not in SELF_TEST:
            print(f"no self-test for {args.experiment}", file=sys.stderr)
            return EXIT_SCHEMA
        select = SELF_TEST[args.experiment]
    if args.criteria:
        try:
            select = [int(c) for c in args.criteria.split(",")]
        except ValueError:
            print(f"bad --criteria {args.criteria!r}", file=sys.stderr)
            return EXIT_SCHEMA
    try:
        user = json.loads(args.config.read_text()) if args.config else None
        cfg = build_config(args.experiment, args.preset, user, seed=args.seed, out=args.out, select=select)
    except (ConfigError, json.JSONDecodeError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        code, summary = run(cfg)
    except BudgetError as e:
        print(f"numerical budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    for e in summary["criteria"]:
        print(f"criterion {e['criterion']:2d} {e['check']:<24s} {'PASS' if e['trend_pass'] else 'FAIL'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
