"""Command-line runner: ``ulab <subcommand> --config <path> [--seed S] [--out DIR]``.

Subcommands: transfer-check, fubini-check, collapse-check, properness,
superstructure-check, array-build, and germ (which takes an action and
expressions instead of a config).  Exit codes: 0 all checks passed,
1 a counterexample or failed check was found (and reported), 2 the
configuration or invocation was invalid.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import suites
from .config import ConfigError, load_config
from .germs import DivisionByZeroGerm, GermSyntaxError
from .report import write_reports

_SUITE_RUNNERS = {
    "transfer-check": suites.run_transfer,
    "fubini-check": suites.run_fubini,
    "collapse-check": suites.run_collapse,
    "properness": suites.run_properness,
    "superstructure-check": suites.run_superstructure,
    "array-build": suites.run_array_build,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ulab",
        description="desk-scale ultrapower laboratory: transfer, Fubini, collapse, "
        "properness, germ, and superstructure experiments",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUITE_RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} suite")
        p.add_argument("--config", required=True, help="path to the YAML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="report directory (default: config output_dir or 'reports')")
    g = sub.add_parser("germ", help="evaluate, compare or classify germ expressions")
    g.add_argument("action", choices=["eval", "evaluate", "compare", "classify"])
    g.add_argument("exprs", nargs="+", help="rational expressions in n, e.g. '(2*n+1)/(n+1)'")
    g.add_argument("--out", default=None, help="optional report directory")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, matching the config-error contract
        return int(exc.code or 0)

    try:
        if args.subcommand == "germ":
            action = "eval" if args.action == "evaluate" else args.action
            result = suites.run_germ(action, args.exprs)
            for line in result.summary:
                print(line)
            if args.out:
                for path in write_reports(args.out, result):
                    print(f"wrote {path}")
            return 0
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        runner = _SUITE_RUNNERS[args.subcommand]
        result = runner(cfg)
        outdir = args.out or cfg.output_dir or "reports"
        paths = write_reports(outdir, result)
        for line in result.summary:
            print(line)
        for path in paths:
            print(f"wrote {path}")
        return 0 if result.passed else 1
    except ConfigError as exc:
        print(f"ulab: {exc}", file=sys.stderr)
        return 2
    except (GermSyntaxError, DivisionByZeroGerm) as exc:
        print(f"ulab: germ error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
