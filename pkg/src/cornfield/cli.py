"""Command-line interface: ``cornfield {thresholds,assess,ingest,verify}``.

Exit codes: 0 success (assess: necessary conditions met), 1 assess verdict "cannot explain
away", 2 usage or input error, 3 verify found a necessity violation, 4 verify found a
sharpness gap above tolerance.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from decimal import Decimal, InvalidOperation
from typing import Optional, Sequence

from .conditions import (
    CANNOT,
    MissingStrengthError,
    OrientationError,
    Scale,
    ThresholdReport,
    ThresholdSpec,
    assess,
    json_number,
    thresholds,
)
from .distribution import Assumption, AssumptionLevel
from .ingest import IngestError, observed_from_table, parse_table
from .measures import AssociationMeasures, MarginError

SEED_ENV = "CORNFIELD_SEED"

EXIT_OK = 0
EXIT_CANNOT = 1
EXIT_USAGE = 2

# flag name -> strength name used by the conditions module
STRENGTH_FLAGS = {
    "rr-eu": "rr_eu",
    "rr-ud": "rr_ud",
    "rr-ud-e1": "rr_ud_e1",
    "rr-ud-e0": "rr_ud_e0",
    "rd-eu": "rd_eu",
    "rd-ud": "rd_ud",
    "rd-ud-e1": "rd_ud_e1",
    "rd-ud-e0": "rd_ud_e0",
    "u-e": "u_e",
    "u-d": "u_d",
    "u-d-star": "u_d_star",
    "u-d-prime": "u_d_prime",
    "a": "a",
    "b": "b",
}


class UsageError(Exception):
    pass


def parse_measure(text: str) -> float:
    """Parse "0.00012" or "0.012%" to a float; the percent form is divided exactly."""
    s = text.strip()
    percent = s.endswith("%")
    if percent:
        s = s[:-1].strip()
    if s.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        value = Decimal(s)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_finite():
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return float(value / 100 if percent else value)


def _seed_default() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def fmt6(x: Optional[float]) -> str:
    if x is None:
        return "-"
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# parser


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scale", choices=[s.value for s in Scale], required=True)
    p.add_argument("--observed", type=parse_measure, required=True,
                   help='observed RR_ED or RD_ED; "0.012%%" and "0.00012" are equivalent')
    p.add_argument("--k", type=int, default=2, help="number of confounder levels (default 2)")
    null = p.add_mutually_exclusive_group()
    null.add_argument("--conditional-null", dest="null", action="store_const",
                      const=Assumption.CONDITIONAL_NULL, help="no effect in any stratum of U (default)")
    null.add_argument("--average-null", dest="null", action="store_const",
                      const=Assumption.AVERAGE_NULL, help="no average effect only")
    p.set_defaults(null=Assumption.CONDITIONAL_NULL)
    p.add_argument("--monotone", action="store_true",
                   help="every non-reference level is at least as prevalent under exposure")


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cornfield",
        description="Cornfield conditions for unmeasured confounding on the relative-risk "
        "and risk-difference scales.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{thresholds,assess,ingest,verify}")

    p = sub.add_parser("thresholds", help="print every applicable threshold")
    _add_spec_args(p)
    _add_format(p)

    p = sub.add_parser("assess", help="check hypothesized confounder strengths")
    _add_spec_args(p)
    for flag, name in STRENGTH_FLAGS.items():
        p.add_argument(f"--{flag}", dest=name, type=parse_measure, default=None, metavar="X")
    _add_format(p)

    p = sub.add_parser("ingest", help="read a count table and print observed measures")
    p.add_argument("path")
    p.add_argument("--delimiter", choices=("comma", "tab"), default="comma")
    _add_format(p)

    p = sub.add_parser("verify", help="run the necessity and sharpness suites")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, default=100_000, help="sampled laws per cell")
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--budget", type=int, default=20_000, help="evaluations per sharpness target")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-sharpness", action="store_true")
    p.add_argument("--log", default=None, help="write a JSON run log to this path")
    p.add_argument("--inflate-thresholds", type=float, default=1.0, help=argparse.SUPPRESS)
    _add_format(p)
    return parser


# ---------------------------------------------------------------------------
# commands


def _spec(args) -> tuple[ThresholdSpec, bool]:
    observed = args.observed
    flipped = False
    if args.scale == "rr":
        if not observed > 0:
            raise UsageError(f"a relative risk must be positive, got {observed!r}")
        if observed < 1:
            observed, flipped = 1.0 / observed, True
    else:
        if not -1.0 <= observed <= 1.0:
            raise UsageError(f"a risk difference must lie in [-1, 1], got {observed!r}")
        if observed < 0:
            observed, flipped = -observed, True
    level = AssumptionLevel(args.null, args.monotone)
    try:
        return ThresholdSpec(Scale(args.scale), args.k, level, observed), flipped
    except (ValueError, OrientationError) as exc:
        raise UsageError(str(exc)) from None


def _with_flip(report: ThresholdReport, flipped: bool) -> ThresholdReport:
    if not flipped:
        return report
    note = "exposure coding flipped to make the observed association positive"
    return ThresholdReport(report.spec, report.entries, report.verdict, True, report.notes + (note,))


def render_report(report: ThresholdReport, fmt: str, with_values: bool) -> str:
    if fmt == "json":
        return _dump(report.as_dict())
    spec = report.spec
    lines = [
        f"scale: {spec.scale.value}  K: {spec.k}  assumption: {spec.assumption}  observed: {fmt6(spec.observed)}"
    ]
    lines += [f"note: {n}" for n in report.notes]
    for e in report.entries:
        row = f"{e.condition_tag.value:<14} {e.lhs} >= {fmt6(e.threshold)}"
        if with_values:
            row += f"  hypothesized: {fmt6(e.hypothesized)}  {e.verdict}"
        lines.append(row)
    if report.verdict is not None:
        lines.append(f"verdict: {report.verdict}")
    return "\n".join(lines) + "\n"


def cmd_thresholds(args) -> int:
    spec, flipped = _spec(args)
    sys.stdout.write(render_report(_with_flip(thresholds(spec), flipped), args.format, False))
    return EXIT_OK


def cmd_assess(args) -> int:
    spec, flipped = _spec(args)
    values = {name: getattr(args, name) for name in STRENGTH_FLAGS.values()}
    try:
        report = assess(spec, values)
    except MissingStrengthError as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(render_report(_with_flip(report, flipped), args.format, True))
    return EXIT_CANNOT if report.verdict == CANNOT else EXIT_OK


MEASURE_FIELDS = (
    "rr_ed", "rd_ed", "rr_eu", "rd_eu",
    "rd_ud_given_e1", "rd_ud_given_e0", "rr_ud_given_e1", "rr_ud_given_e0",
)


def measures_as_dict(m: AssociationMeasures) -> dict:
    out = {}
    for name in MEASURE_FIELDS:
        value = getattr(m, name)
        out[name] = [json_number(v) for v in value] if isinstance(value, tuple) else json_number(value)
    return out


def cmd_ingest(args) -> int:
    delimiter = "\t" if args.delimiter == "tab" else ","
    try:
        table = parse_table(args.path, delimiter)
        m = observed_from_table(table)
    except OSError as exc:
        raise UsageError(f"cannot read {args.path}: {exc.strerror}") from None
    except (IngestError, MarginError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    d = measures_as_dict(m)
    if args.format == "json":
        sys.stdout.write(_dump(d))
        return EXIT_OK
    lines = []
    for name, value in d.items():
        if value is None:
            continue
        getter = getattr(m, name)
        if isinstance(getter, tuple):
            lines.append(f"{name}: " + ", ".join(fmt6(v) for v in getter))
        else:
            lines.append(f"{name}: {fmt6(getter)}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .oracle.suite import run_verify

    if args.k < 2:
        raise UsageError("--k must be >= 2")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.budget < 1 or args.workers < 1:
        raise UsageError("--budget and --workers must be >= 1")
    seed = args.seed if args.seed is not None else _seed_default()
    summary = run_verify(
        args.k,
        n=args.n,
        seed=seed,
        budget=args.budget,
        workers=args.workers,
        threshold_scale=args.inflate_thresholds,
        sharpness=not args.no_sharpness,
    )
    log = summary.as_dict()
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(_dump(log))
    if args.format == "json":
        sys.stdout.write(_dump(log))
        return summary.exit_code
    lines = [f"verify K={summary.k} n={summary.n} seed={summary.seed}"]
    for e in log["entries"]:
        if e["check"] == "necessity":
            lines.append(
                f"necessity {e['condition_tag']:<14} {e['assumption']:<28} {e['sampler']:<8} "
                f"violations={e['violations']} worst_margin={fmt6(_num(e['worst_margin']))}"
            )
        else:
            lines.append(
                f"sharpness {e['condition_tag']:<14} {e['assumption']:<28} observed={fmt6(e['observed'])} "
                f"bound={fmt6(_num(e['threshold']))} achieved={fmt6(_num(e['hypothesized']))} "
                f"gap={_num(e['relative_gap']):.3g} {e['verdict']}"
            )
    lines.append(
        f"necessity violations: {summary.necessity_failures}  "
        f"sharpness failures: {summary.sharpness_failures}  exit: {summary.exit_code}"
    )
    sys.stdout.write("\n".join(lines) + "\n")
    return summary.exit_code


def _num(x) -> float:
    return float(x) if x is not None else math.nan


COMMANDS = {"thresholds": cmd_thresholds, "assess": cmd_assess, "ingest": cmd_ingest, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
