"""Command line entry points.

Exit codes: 0 for completed runs and passing checks, 2 for a blow-up
verdict (an expected outcome, not an error), 1 for failures and
inconclusive results.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

from .harness import ExperimentConfig, run_experiment, threshold_bisect, verify_suite
from .stokeslet import kernel_l1_check


def _add_run(sub):
    p = sub.add_parser("run", help="run one experiment from a config file")
    p.add_argument("--config", required=True, help="path to a config JSON file")
    p.add_argument("--model", help="override the model tag")
    p.add_argument("--n", type=int, help="override the grid size")
    p.add_argument("--amplitude", type=float, help="override the initial amplitude")
    p.add_argument("--t-end", type=float, dest="t_end", help="override the horizon")
    p.add_argument("--out", help="override the output directory")


def _add_sweep(sub):
    p = sub.add_parser("sweep", help="bisect the decay/blow-up amplitude threshold")
    p.add_argument("--model", required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--t-end", type=float, dest="t_end", default=2.5,
                   help="classification horizon (commitment must occur by here)")
    p.add_argument("--out", default="")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="stokeswave")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the invariant batteries")
    v.add_argument("--level", choices=("fast", "full"), default="fast")

    _add_run(sub)
    _add_sweep(sub)

    k = sub.add_parser("kernel-check", help="reduced-kernel L1 and decay check")
    k.add_argument("--cutoff", type=float, default=40.0)
    k.add_argument("--tol", type=float, default=1e-4)

    args = parser.parse_args(argv)

    if args.command == "verify":
        report = verify_suite(args.level)
        print(report.text())
        return 0 if report.passed else 1

    if args.command == "run":
        config = ExperimentConfig.from_text(Path(args.config).read_text())
        overrides = {}
        for name in ("model", "n", "amplitude", "t_end"):
            value = getattr(args, name)
            if value is not None:
                overrides[name] = value
        if args.out is not None:
            overrides["out_dir"] = args.out
        if overrides:
            config = ExperimentConfig(**{**asdict(config), **overrides})
        record = run_experiment(config)
        print(f"status = {record.verdict.status}")
        print(f"t_final = {record.verdict.t_final!r}")
        for key, value in record.summary.items():
            print(f"{key} = {value}")
        if record.verdict.status == "completed":
            return 0
        if record.verdict.status == "blew_up":
            return 2
        return 1

    if args.command == "sweep":
        config = ExperimentConfig(kind="model", model=args.model, family=args.family,
                                  n=args.n, t_end=args.t_end, out_dir=args.out)
        result = threshold_bisect(config, args.lo, args.hi, args.budget)
        for amp, status, n in result.runs:
            print(f"amplitude {amp!r}: {status} (n={n})")
        print(f"status = {result.status}")
        if result.status == "bracketed":
            print(f"interval = [{result.lo!r}, {result.hi!r}] width {result.width!r}")
            return 0
        print(result.message)
        return 1

    if args.command == "kernel-check":
        chk = kernel_l1_check(args.cutoff, args.tol)
        print(f"l1_s1 = {chk.l1_s1!r}")
        print(f"l1_s2 = {chk.l1_s2!r}")
        print(f"tail_s1 = {chk.tail_s1!r}")
        print(f"tail_s2 = {chk.tail_s2!r}")
        print(f"decay_exponent_s1 = {chk.decay_exponent_s1!r}")
        print(f"decay_exponent_s2 = {chk.decay_exponent_s2!r}")
        print(f"status = {chk.status}")
        return 0 if chk.converged else 1

    return 1


if __name__ == "__main__":
    sys.exit(main())
