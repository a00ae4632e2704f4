"""Command-line entry point.

    gridflow <subcommand> --scenario <file> [--out <dir>] [--seed N]

Subcommands: ``run`` executes the whole pipeline; ``generate-grid``,
``reconstruct``, ``transform``, ``simulate`` and ``report`` execute one
stage against the artifacts already present in the run directory.

Exit codes: 0 success, 1 validation problem, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import NumericalError, StageError, ValidationError
from .pipeline import (_stage, run_pipeline, stage_fields, stage_network, stage_report,
                       stage_simulate, stage_transform)
from .scenario import load_scenario

_STAGES = {
    "generate-grid": stage_network,
    "reconstruct": stage_fields,
    "transform": stage_transform,
    "simulate": stage_simulate,
    "report": stage_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ["run", *_STAGES]:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="scenario YAML file")
        p.add_argument("--out", default="gridflow-run", help="run directory")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario = replace(scenario, seed=args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            report = run_pipeline(scenario, out)
            print(f"pipeline complete: {len(report.etas)} lines, "
                  f"final L2 error {report.l2_global[-1]:.6g} "
                  f"({report.l2_global[-1] / max(report.l2_global[0], 1e-300):.3%} of initial)")
        else:
            fn = _STAGES[args.command]
            _stage(out, args.command, lambda: fn(scenario, out))
            print(f"stage '{args.command}' complete, artifacts in {out}")
    except StageError as exc:
        cause = exc.cause
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(cause, NumericalError) else 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
