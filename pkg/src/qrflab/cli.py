"""Command line entry point: ``qrflab run|verify|examples``.

Exit status is 0 when every check passes, 1 when a check fails and 2 for
usage, parse or validation errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, ParseError, ScenarioError
from .group import BUILTIN_GROUPS
from .scenario import Overrides, builtin_names, emit_report, load_scenario, run_scenario
from .verify import SUITE_KINDS, SuiteSpec, run_suite

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="override the seed of every suite")
    p.add_argument("--trials", type=int, help="override the trial count of every suite")
    p.add_argument("--tol", type=float, help="override the tolerance of every suite")
    p.add_argument("--format", choices=("human", "machine"), default="human")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--workers", type=int, default=1, help="threads for suite trials")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrflab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file or a builtin scenario")
    run.add_argument("scenario", help="path to a JSON scenario or a builtin name")
    _common(run)

    ver = sub.add_parser("verify", help="run one randomized suite")
    ver.add_argument("suite", help=f"path to a JSON suite spec or a kind: {', '.join(SUITE_KINDS)}")
    ver.add_argument("--group", help=f"group name, e.g. {', '.join(BUILTIN_GROUPS)}")
    ver.add_argument("--frames", type=int)
    ver.add_argument("--phys", help="comma separated representations, e.g. qubit,qubit")
    _common(ver)

    sub.add_parser("examples", help="list builtin scenarios and suite kinds")
    return parser


def _suite_spec(args) -> SuiteSpec:
    if args.suite in SUITE_KINDS:
        base = {"kind": args.suite}
    else:
        path = Path(args.suite)
        if not path.is_file():
            raise ConfigError(f"{args.suite!r} is neither a suite kind nor a file")
        try:
            base = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        if not isinstance(base, dict):
            raise ParseError("suite spec must be a JSON object")
    extra = {"group": args.group, "frames": args.frames, "seed": args.seed,
             "trials": args.trials, "tol": args.tol}
    base.update({k: v for k, v in extra.items() if v is not None})
    if args.phys:
        base["physical"] = [s.strip() for s in args.phys.split(",") if s.strip()]
    return SuiteSpec.from_dict(base)


def _write(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _examples() -> str:
    lines = ["builtin scenarios:"]
    for name in builtin_names():
        sc = load_scenario(name)
        lines.append(f"  {name:<10} {sc.description}")
    lines.append("suite kinds:")
    lines.append("  " + ", ".join(SUITE_KINDS))
    lines.append("groups:")
    lines.append("  " + ", ".join(BUILTIN_GROUPS) + " (also Zn, Sn and products like Z2xZ3)")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "examples":
            _write(_examples(), None)
            return EXIT_OK
        if args.command == "run":
            overrides = Overrides(args.seed, args.trials, args.tol, args.workers)
            report = run_scenario(load_scenario(args.scenario), overrides)
        else:
            report = run_suite(_suite_spec(args), workers=args.workers)
    except (ScenarioError, ConfigError) as exc:
        print(f"qrflab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write(emit_report(report, args.format), args.out)
    return EXIT_OK if report.passed else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
