"""``eglab`` command line: ``run``, ``verify`` and ``plotdata`` subcommands."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import check_config, parse_config
from .experiment import emit_plotdata, run_experiment, verify_experiment
from .operators import ConfigError, UsageError


def _load(args):
    cfg = parse_config(args.config, check=False)
    if args.seed_offset:
        cfg = cfg.with_seed_offset(args.seed_offset)
    check_config(cfg)
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    res = run_experiment(cfg, out_dir=args.out, jobs=args.jobs)
    for entry in cfg.entries:
        finals = res.final_rel(entry.label)
        if finals:
            print(f"{entry.label}: mean final rel_fb_residual = {sum(finals) / len(finals):.6g} "
                  f"over {len(finals)} runs")
    print(f"summary: {res.summary_file}")
    if res.failures:
        for o in res.failures:
            print(f"FAILED {o.label} seed={o.seed} at k={o.failure[0]}: {o.failure[1]}", file=sys.stderr)
        print(f"{len(res.failures)} of {len(res.outcomes)} runs failed", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    cfg = _load(args)
    outcomes = verify_experiment(cfg, out_dir=args.out, jobs=args.jobs)
    for o in outcomes:
        print(o.text())
    bad = sum(not o.passed for o in outcomes)
    if bad:
        print(f"{bad} of {len(outcomes)} checks failed", file=sys.stderr)
        return 1
    return 0


def cmd_plotdata(args) -> int:
    out = args.out
    if out is not None and not out.endswith((".tsv", ".txt", ".dat")):
        Path(out).mkdir(parents=True, exist_ok=True)
        out = str(Path(out) / (Path(args.summary).stem + ".plot.tsv"))
    print(emit_plotdata(args.summary, out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eglab", description="Extragradient-type solver benchmark harness.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="experiment config file (INI)")
        sp.add_argument("--out", help="output directory (default: config 'out' or ./results)")
        sp.add_argument("--jobs", type=int, default=None, help="worker processes")
        sp.add_argument("--seed-offset", type=int, default=0, help="added to every seed")

    sp = sub.add_parser("run", help="run an experiment and write CSV traces plus a summary")
    common(sp)
    sp.set_defaults(func=cmd_run)
    sp = sub.add_parser("verify", help="check closed-form bounds and potentials")
    common(sp)
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("plotdata", help="turn a summary CSV into log-log plot data")
    sp.add_argument("summary")
    sp.add_argument("--out", help="output file or directory")
    sp.set_defaults(func=cmd_plotdata)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
