"""Command-line entry point: ``perimfix <command> ...``.

Exit codes: 0 success, 1 invalid instance, 2 analysis precondition violated,
3 iteration failed, 4 internal self-check failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from perimfix.analysis import HALF, AnalysisError, fixed_points
from perimfix.instance_io import (
    build_report,
    canonical_json,
    emit_report,
    hunt_to_json,
    load_instance_document,
    trace_dict,
)
from perimfix.iteration import (
    POLICIES,
    IterationConfig,
    IterationError,
    run_iteration,
    verify_cauchy_bounds,
)
from perimfix.metric import InstanceError, as_rational
from perimfix.search import (
    BUILTINS,
    DEFAULT_BUDGET,
    FILTERS,
    BudgetExceeded,
    GenConfig,
    SelfCheckFailure,
    classify,
    hunt_open_problem,
)

EXIT_OK, EXIT_INVALID, EXIT_PRECONDITION, EXIT_ITERATION, EXIT_SELFCHECK = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fixture_text(name: str) -> str:
    if name not in BUILTINS:
        raise CliError(f"unknown example {name!r}", EXIT_INVALID)
    return resources.files("perimfix.fixtures").joinpath(f"{name}.json").read_text(encoding="utf-8")


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_INVALID) from None
    doc = load_instance_document(text)
    space, fmap = doc.build()
    return doc, space, fmap


def _out(text: str) -> None:
    sys.stdout.write(text)


def cmd_validate(args) -> int:
    doc, space, fmap = _load(args.file)
    _out(f"valid: {space.size} points, {doc.metric_kind} metric, map total\n")
    return EXIT_OK


def cmd_analyze(args) -> int:
    doc, space, fmap = _load(args.file)
    if args.period is not None and args.period < 1:
        raise CliError("--period must be positive", EXIT_PRECONDITION)
    periods = (2,) if args.period is None else (2, args.period)
    ci = classify(space, fmap, periods)
    _out(emit_report(build_report(ci, doc.metric_kind), "json" if args.json else "human"))
    return EXIT_OK


def cmd_fixed_points(args) -> int:
    doc, space, fmap = _load(args.file)
    pts = [space.labels[i] for i in sorted(fixed_points(space, fmap))]
    if args.json:
        _out(canonical_json({"fixed_points": pts}))
    else:
        _out("".join(p + "\n" for p in pts) if pts else "no fixed points\n")
    return EXIT_OK


def cmd_iterate(args) -> int:
    doc, space, fmap = _load(args.file)
    try:
        start = space.index(args.start)
    except KeyError as exc:
        raise CliError(str(exc.args[0]), EXIT_PRECONDITION) from None
    ci = classify(space, fmap)
    mlcp = ci.lambdas.lambda_min_mlcp
    if args.lam is not None:
        lam = args.lam
    elif mlcp < HALF or (args.unrestricted and mlcp < 1):
        lam = mlcp
    else:
        raise CliError(
            f"lambda_min_mlcp = {mlcp} is not below 1/2; pass --unrestricted with --lambda to run anyway",
            EXIT_PRECONDITION,
        )
    config = IterationConfig(lam, start, args.max_steps, args.policy, theorem4=not args.unrestricted)
    trace = run_iteration(space, fmap, config)
    check = None
    if lam < HALF and len(trace.points) >= 3:
        check = verify_cauchy_bounds(trace, lam)
    report = build_report(ci, doc.metric_kind, trace_dict(space, trace, check, start))
    _out(emit_report(report, "json" if args.json else "human"))
    if check is not None and not check.ok:
        raise CliError(f"iteration broke the {check.bound} bound at n={check.index}", EXIT_SELFCHECK)
    if not trace.outcome.found:
        sys.stderr.write(f"iteration did not reach a fixed point: {trace.outcome.kind}\n")
        return EXIT_ITERATION
    return EXIT_OK


def cmd_search(args) -> int:
    try:
        gen = GenConfig(
            n_points=args.points,
            weight_max=args.weight_max,
            image_size_min=args.image_min,
            image_size_max=args.image_max,
            seed=args.seed,
            count=args.instances,
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from None
    try:
        report = hunt_open_problem(
            gen, args.exhaustive, filter=args.filter, budget=args.budget, workers=args.workers
        )
    except BudgetExceeded as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from None
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from None
    text = canonical_json(hunt_to_json(report, gen))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        counts = ", ".join(f"{k}={v}" for k, v in sorted(report.regime_counts.items()))
        _out(f"{report.total} instances ({counts}); {len(report.findings)} findings -> {args.output}\n")
    else:
        _out(text)
    return EXIT_OK


def cmd_examples(args) -> int:
    text = fixture_text(args.name)
    if args.emit:
        Path(args.emit).write_text(text, encoding="utf-8")
    else:
        _out(text)
    return EXIT_OK


def _rational_arg(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perimfix",
        description="Analyze set-valued maps on finite metric spaces with exact arithmetic.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate an instance file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="classify an instance")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="emit the canonical JSON report")
    p.add_argument("--period", type=int, metavar="N", help="also list points of prime period N")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("iterate", help="run the fixed-point iteration")
    p.add_argument("file")
    p.add_argument("--start", required=True, help="label of the starting point")
    p.add_argument("--lambda", dest="lam", type=_rational_arg, metavar="P/Q")
    p.add_argument("--policy", choices=POLICIES, default="nearest-lex")
    p.add_argument("--max-steps", type=int, metavar="K")
    p.add_argument("--unrestricted", action="store_true", help="allow lambda >= 1/2 (diagnostic only)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("fixed-points", help="list fixed points by direct scan")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("search", help="hunt for instances in the open lambda range")
    p.add_argument("--points", type=int, required=True, metavar="N")
    p.add_argument("--instances", type=int, default=0, metavar="K", help="random instances to draw")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--weight-max", type=int, default=9, metavar="W")
    p.add_argument("--image-min", type=int, default=1, metavar="A")
    p.add_argument("--image-max", type=int, default=None, metavar="B")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--filter", choices=FILTERS, default="open-gap")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="instance cap for exhaustive runs")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", "-o", metavar="PATH", help="write the findings report here")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("examples", help="write one of the built-in instances")
    p.add_argument("--name", choices=BUILTINS, required=True)
    p.add_argument("--emit", metavar="PATH")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except InstanceError as exc:
        sys.stderr.write(f"invalid instance: {exc}\n")
        return EXIT_INVALID
    except AnalysisError as exc:
        sys.stderr.write(f"precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    except (SelfCheckFailure, IterationError) as exc:
        sys.stderr.write(f"self-check failed: {exc}\n")
        return EXIT_SELFCHECK


if __name__ == "__main__":
    sys.exit(main())
