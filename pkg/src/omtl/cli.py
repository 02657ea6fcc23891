"""Command-line entry point: ``omtl synth | run | compare``.

Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .benchmark.config import ConfigError, RunConfig, load_config
from .benchmark.data import save_csv_tasks, synth_generate
from .benchmark.experiment import format_table, load_datasets, oracle_check, run_all, write_outputs
from .benchmark.methods import METHODS
from .errors import InvalidInputError, NumericalBreakdownError, OmtlError
from .task_graph import similarity_from_series


class UsageError(Exception):
    pass


def _common(p):
    p.add_argument("--config", help="YAML/JSON config file (a previous report.json works too)")
    p.add_argument("--data", nargs="+", help="CSV files, one column per task")
    p.add_argument("--mu", type=float, help="training fraction (default 0.275)")
    p.add_argument("--lag", type=int, help="autoregressive order (default 9)")
    p.add_argument("--gamma", type=float, help="diagonal shrinkage of the interaction matrix")
    p.add_argument("--elm", action="store_true", help="map inputs through random tanh features")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omtl", description="Online multi-task regression benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic multi-task CSV")
    s.add_argument("--tasks", type=int, required=True)
    s.add_argument("--len", type=int, required=True, dest="length")
    s.add_argument("--coupling", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="CSV path")
    s.add_argument("--header", action="store_true", help="write task names as a header row")

    r = sub.add_parser("run", help="tune and evaluate one method")
    _common(r)
    r.add_argument("--method", choices=sorted(METHODS))
    r.add_argument("--oracle-check", action="store_true",
                   help="compare recursive MT-WRLS weights with the dense solve on 60 test samples")

    c = sub.add_parser("compare", help="evaluate several methods over several datasets")
    _common(c)
    c.add_argument("--methods", nargs="+", choices=sorted(METHODS))
    c.add_argument("--synth-tasks", type=int, help="generate datasets instead of reading files")
    c.add_argument("--synth-len", type=int, default=400)
    c.add_argument("--coupling", type=float, default=0.9)
    c.add_argument("--seeds", type=int, nargs="+")
    return parser


def cmd_synth(args) -> int:
    if args.tasks < 2:
        raise UsageError("--tasks must be at least 2")
    if args.length < 50:
        raise UsageError("--len must be at least 50")
    if not 0 <= args.coupling <= 1:
        raise UsageError("--coupling must lie in [0, 1]")
    ds = synth_generate(args.tasks, args.length, args.coupling, args.seed)
    save_csv_tasks(ds, args.out, header=args.header)
    sims = similarity_from_series(ds.series)
    off = sims[~np.eye(ds.T, dtype=bool)]
    print(f"wrote {args.out}: T={ds.T} n={ds.n} similarity range [{off.min():.3f}, {off.max():.3f}]")
    return 0


def _resolve(args, overrides) -> RunConfig:
    raw = load_config(args.config) if args.config else {}
    overrides.update(data=args.data, mu=args.mu, lag=args.lag, gamma=args.gamma,
                     jobs=args.jobs, out=args.out)
    if args.elm:
        overrides["elm"] = dict(raw.get("elm") or {})
    return RunConfig.resolve(raw, overrides)


def cmd_run(args) -> int:
    over = {"methods": [args.method] if args.method else None}
    cfg = _resolve(args, over)
    if len(cfg.methods) != 1:
        raise UsageError("run takes exactly one method; use compare for several")
    if args.oracle_check and cfg.methods[0] != "mt-wrls":
        raise UsageError("--oracle-check applies to mt-wrls only")
    datasets = load_datasets(cfg)
    results = run_all(cfg, datasets)
    extra = {}
    if args.oracle_check:
        devs = [oracle_check(cfg, ds, row[0].params["lam"]) for ds, row in zip(datasets, results)]
        extra["oracle_check"] = {"max_deviation": max(devs), "per_dataset": devs}
        print(f"oracle check: max deviation {max(devs):.3e}")
    report = write_outputs("run", cfg, datasets, results, Path(cfg.out), extra)
    for rec in report["datasets"]:
        res = rec["results"][0]
        print(f"{rec['id']}: {res['method']} params={res['params']} "
              f"RELRMSE={res['mean']['relrmse']:.4f} RELMAE={res['mean']['relmae']:.4f}")
    print(f"report written to {Path(cfg.out) / 'report.json'}")
    return 0


def cmd_compare(args) -> int:
    over = {"methods": args.methods}
    if args.synth_tasks is not None:
        over["synth"] = {"tasks": args.synth_tasks, "len": args.synth_len,
                         "coupling": args.coupling, "seeds": args.seeds or [0, 1]}
    cfg = _resolve(args, over)
    if len(cfg.methods) < 2:
        raise UsageError("compare needs at least 2 methods")
    datasets = load_datasets(cfg)
    if len(datasets) < 2:
        raise UsageError("compare needs at least 2 datasets")
    results = run_all(cfg, datasets)
    report = write_outputs("compare", cfg, datasets, results, Path(cfg.out))
    print(format_table(report["summary"]))
    print(f"report written to {Path(cfg.out) / 'report.json'}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)   # exits 2 on malformed flags
    handler = {"synth": cmd_synth, "run": cmd_run, "compare": cmd_compare}[args.command]
    try:
        return handler(args)
    except (UsageError, ConfigError) as exc:
        print(f"omtl {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericalBreakdownError as exc:
        step = f" at step {exc.step}" if exc.step is not None else ""
        print(f"omtl {args.command}: numerical breakdown{step}: {exc}", file=sys.stderr)
        return 1
    except (OmtlError, InvalidInputError, OSError, ZeroDivisionError) as exc:
        print(f"omtl {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
