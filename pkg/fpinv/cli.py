#!/usr/bin/env python3
"""
fpinv command line.

Subcommands:
  enumerate  list the involutions of [n] avoiding a pattern, with fixed points
  weights    fixed-point weight polynomial of a pattern class
  dist       q-biased law of the fixed-point count
  limit      evaluate a limit law's pmf or cdf
  sample     draw a weighted sample of the alternating-eigenvalue law
  verify     run a theorem check and write its report
  selftest   cross-check every counting engine against its oracle

Exit codes: 0 pass, 1 threshold failure, 2 usage error.
"""

import argparse
import asyncio
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from fpinv import __version__, emit, gf_engine, limit_laws, perm_core, shape_engine
from fpinv import verify_harness as harness
from fpinv.fp_types import (
    ExperimentReport,
    ExperimentSpec,
    MonotoneParity,
    NBParity,
    SigmaClass,
    WeightPolynomial,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Configuration
# ============================================================================


ENGINES: Dict[str, Tuple[str, ...]] = {
    "c321": ("gf", "path", "bruteforce"),
    "c231": ("gf", "bruteforce"),
    "inc": ("shape", "bruteforce"),
    "dec": ("shape", "bruteforce"),
}
CLASS_TAGS = {"c321": "321", "c231": "231"}

THEOREMS = {"t1": "T1", "t2": "T2", "t3": "T3", "t4": "T4", "anchor": "anchor"}
DEFAULT_ENGINES = {
    "T1": "shape",
    "T2": "shape",
    "T3": "gf",
    "T4": "gf",
    "anchor": "montecarlo",
}
DIRECTIONS = {"T1": "increasing", "T2": "decreasing"}
DEFAULT_N_LISTS = {
    "T1even": (10, 20, 40),
    "T1odd": (11, 21, 41),
    "T2": (100, 200, 400),
    "T3": (100, 200, 500),
    "T4": (100, 200, 500),
    "anchor": (),
}
DEFAULT_ANCHOR_SAMPLES = 1_000_000


# ============================================================================
# Pure Functions - No side effects, deterministic
# ============================================================================


def parse_q(text: str) -> Fraction:
    """Exact rational from "p/q", a decimal or an integer."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Invalid q: {text}") from e
    if value <= 0:
        raise ValueError(f"q must be positive, got {text}")
    return value


def parse_int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise ValueError(f"Invalid integer list: {text}") from e


def parse_float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise ValueError(f"Invalid number list: {text}") from e


def resolve_engine(pattern_class: str, engine: Optional[str]) -> str:
    """Default engine of a class, or ValueError when the pair is incompatible."""
    allowed = ENGINES[pattern_class]
    chosen = engine or allowed[0]
    if chosen not in allowed:
        raise ValueError(
            f"Engine {chosen} does not support {pattern_class}; "
            f"use one of {', '.join(allowed)}"
        )
    return chosen


def compute_weights(
    pattern_class: str, n: int, engine: str, k: Optional[int] = None
) -> WeightPolynomial:
    """Weight polynomial of row n for a class with an already-resolved engine."""
    if pattern_class in ("inc", "dec"):
        if k is None:
            raise ValueError(f"--k is required for pattern class {pattern_class}")
        direction = "increasing" if pattern_class == "inc" else "decreasing"
        if engine == "bruteforce":
            return perm_core.brute_force_weights(
                n, shape_engine.monotone_pattern(k, direction)
            )
        return shape_engine.monotone_weights(n, k, direction)
    if engine == "bruteforce":
        return perm_core.brute_force_weights(n, CLASS_TAGS[pattern_class])
    return gf_engine.class_row(SigmaClass(pattern_class), n, engine)


def build_specs(args: argparse.Namespace) -> List[ExperimentSpec]:
    """One ExperimentSpec per --q value."""
    theorem = THEOREMS[args.theorem]
    if args.n_list:
        n_list = parse_int_list(args.n_list)
    elif theorem == "T1":
        n_list = DEFAULT_N_LISTS[f"T1{args.parity or 'even'}"]
    else:
        n_list = DEFAULT_N_LISTS[theorem]
    samples = args.samples
    if theorem == "anchor" and samples is None:
        samples = DEFAULT_ANCHOR_SAMPLES
    specs = [
        ExperimentSpec(
            theorem=theorem,
            q=parse_q(text),
            n_list=n_list,
            engine=args.engine or DEFAULT_ENGINES[theorem],
            k=args.k if theorem != "anchor" else (args.k or 2),
            direction=DIRECTIONS.get(theorem),
            parity=args.parity,
            samples=samples or 0,
            seed=args.seed,
        )
        for text in args.q.split(",")
        if text.strip()
    ]
    if not specs:
        raise ValueError("--q needs at least one value")
    for spec in specs:
        harness.validate_spec(spec)
    return specs


def evaluate_limit(args: argparse.Namespace) -> Tuple[str, List[Tuple[float, float]]]:
    """(kind, [(x, value)]) for the limit subcommand."""
    xs = parse_float_list(args.x)
    q = float(parse_q(args.q)) if args.q else None
    if args.law in ("nb", "monotone"):
        if q is None or args.parity is None:
            raise ValueError(f"--q and --parity are required for law {args.law}")
        if any(x != int(x) for x in xs):
            raise ValueError("pmf arguments must be integers")
        law = (
            NBParity(q=q, parity=args.parity)
            if args.law == "nb"
            else MonotoneParity(k=args.k or 1, q=q, parity=args.parity)
        )
        return "pmf", [(x, limit_laws.law_pmf(law, int(x))) for x in xs]
    if args.law == "rayleigh":
        cdf = limit_laws.rayleigh_cdf
    elif args.law == "normal":
        cdf = limit_laws.std_normal_cdf
    else:
        cdf = limit_laws.tilted_rayleigh2_cdf(q if q is not None else 1.0)
    return "cdf", [(x, float(cdf(x))) for x in xs]


# ============================================================================
# Async I/O Functions - Side effects isolated here
# ============================================================================


async def emit_text(text: str, out: Optional[str]) -> None:
    """Write to --out or stdout."""
    if out:
        await emit.write_text(Path(out), text)
        logger.info("wrote %s", out)
    else:
        sys.stdout.write(text)


async def cmd_enumerate(args: argparse.Namespace) -> int:
    pairs = perm_core.avoiding_involutions(args.n, args.pattern)
    await emit_text(emit.enumeration_listing(pairs), args.out)
    return 0


async def cmd_weights(args: argparse.Namespace) -> int:
    engine = resolve_engine(args.pattern_class, args.engine)
    w = compute_weights(args.pattern_class, args.n, engine, args.k)
    render = emit.weights_to_csv if args.format == "csv" else emit.weights_to_json
    await emit_text(render([w]), args.out)
    return 0


async def cmd_dist(args: argparse.Namespace) -> int:
    engine = resolve_engine(args.pattern_class, args.engine)
    q = parse_q(args.q)
    w = compute_weights(args.pattern_class, args.n, engine, args.k)
    d = perm_core.biased_distribution(w, q)
    if args.format == "csv":
        text = emit.distribution_to_csv(d)
    else:
        text = emit.distribution_to_json(d)
    await emit_text(text, args.out)
    return 0


async def cmd_limit(args: argparse.Namespace) -> int:
    kind, values = evaluate_limit(args)
    if args.format == "csv":
        text = emit.limit_values_to_csv(values, kind)
    else:
        text = emit.limit_values_to_json(args.law, values, kind)
    await emit_text(text, args.out)
    return 0


async def cmd_sample(args: argparse.Namespace) -> int:
    q = float(parse_q(args.q))
    law = await asyncio.to_thread(
        limit_laws.goe_limit_law, args.k, q, args.samples, args.seed
    )
    await emit_text(emit.sample_to_csv(law.sample), args.out)
    return 0


async def write_reports(
    reports: Sequence[ExperimentReport], out: Optional[str], fmt: str
) -> List[Path]:
    """Reports go to --out as one document, else one file each under reports/."""
    csv_format = fmt == "csv"
    if out:
        if csv_format:
            text = emit.report_rows_csv(reports)
        else:
            text = emit.reports_to_json(reports)
        return [await emit.write_text(Path(out), text)]
    suffix = ".csv" if csv_format else ".json"
    paths = []
    for report in reports:
        path = emit.report_filename(report).with_suffix(suffix)
        if csv_format:
            text = emit.report_rows_csv([report])
        else:
            text = emit.report_to_json(report)
        paths.append(await emit.write_text(path, text))
    return paths


async def cmd_verify(args: argparse.Namespace) -> int:
    specs = build_specs(args)
    if len(specs) == 1:
        reports = [await asyncio.to_thread(harness.run_experiment, specs[0])]
    else:
        reports = await harness.run_sweep(specs)
    for path in await write_reports(reports, args.out, args.format):
        print(path)
    for report in reports:
        for check in report.checks:
            status = "ok" if check.passed else "FAIL"
            print(
                f"{report.spec.theorem} q={emit.format_scalar(report.spec.q)} "
                f"{check.name}: {check.value:.6g} "
                f"(threshold {check.threshold:.6g}) {status}"
            )
    return 0 if all(r.passed for r in reports) else 1


async def cmd_selftest(args: argparse.Namespace) -> int:
    report = await asyncio.to_thread(
        harness.cross_engine_check, args.n_max_poly, args.n_max_path
    )
    for check in report.checks:
        if not check.passed:
            print(f"mismatch in {check.name}: {check.detail}")
            break
    if args.out:
        await emit.write_text(Path(args.out), emit.report_to_json(report))
    print("selftest passed" if report.passed else "selftest FAILED")
    return 0 if report.passed else 1


COMMANDS = {
    "enumerate": cmd_enumerate,
    "weights": cmd_weights,
    "dist": cmd_dist,
    "limit": cmd_limit,
    "sample": cmd_sample,
    "verify": cmd_verify,
    "selftest": cmd_selftest,
}


# ============================================================================
# Argument parsing
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    logging_only = argparse.ArgumentParser(add_help=False)
    logging_only.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default="WARNING",
    )
    common = argparse.ArgumentParser(add_help=False, parents=[logging_only])
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument(
        "--out", help="Output path (default: stdout, or reports/ for verify)"
    )
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(
        prog="fpinv",
        description="Fixed points of q-biased pattern-avoiding involutions",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "enumerate", parents=[common], help="List avoiding involutions"
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pattern", required=True, help="e.g. 321, inc4, dec3")

    for name, help_text in (
        ("weights", "Weight polynomial"),
        ("dist", "Biased fp law"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--pattern-class", choices=sorted(ENGINES), required=True)
        p.add_argument("--k", type=int, help="Monotone pattern size minus one")
        p.add_argument("--engine", choices=["gf", "path", "shape", "bruteforce"])
        if name == "dist":
            p.add_argument("--q", required=True, help="Bias, e.g. 2, 0.5 or 1/2")

    p = sub.add_parser("limit", parents=[common], help="Evaluate a limit law")
    p.add_argument(
        "--law",
        choices=["nb", "monotone", "rayleigh", "normal", "tilted2"],
        required=True,
    )
    p.add_argument("--q")
    p.add_argument("--k", type=int)
    p.add_argument("--parity", choices=["even", "odd"])
    p.add_argument("--x", required=True, help="Comma-separated points")

    p = sub.add_parser(
        "sample", parents=[logging_only], help="Draw a weighted GOE sample"
    )
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", default="1", help="Tilt in (0, 1]")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="Output path (default: stdout)")

    p = sub.add_parser("verify", parents=[common], help="Run a theorem check")
    p.add_argument("--theorem", choices=sorted(THEOREMS), required=True)
    p.add_argument("--q", required=True, help="One value or a comma-separated sweep")
    p.add_argument("--k", type=int)
    p.add_argument("--parity", choices=["even", "odd"])
    p.add_argument("--n-list")
    p.add_argument("--samples", type=int)
    p.add_argument(
        "--engine", choices=["gf", "path", "shape", "bruteforce", "montecarlo"]
    )

    p = sub.add_parser("selftest", parents=[common], help="Cross-check the engines")
    p.add_argument("--n-max-poly", type=int, default=gf_engine.POLY_ROW_CAP)
    p.add_argument("--n-max-path", type=int, default=400)
    return parser


def validate_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Flag checks that need no computation."""
    if args.command == "enumerate" and not 0 <= args.n <= perm_core.BRUTE_FORCE_MAX_N:
        parser.error(f"--n must be in 0..{perm_core.BRUTE_FORCE_MAX_N} for enumerate")
    if args.command in ("weights", "dist") and args.n < 0:
        parser.error("--n must be nonnegative")
    cap = gf_engine.POLY_ROW_CAP
    if args.command == "selftest" and not 0 <= args.n_max_poly <= cap:
        parser.error(f"--n-max-poly must be in 0..{cap}")
    try:
        if args.command in ("weights", "dist"):
            resolve_engine(args.pattern_class, args.engine)
        if args.command == "dist":
            parse_q(args.q)
        if args.command == "verify":
            build_specs(args)
        if args.command == "sample":
            if args.k < 2 or args.samples < 1 or parse_q(args.q) > 1:
                raise ValueError("sample needs --k >= 2, --samples >= 1, 0 < q <= 1")
    except ValueError as e:
        parser.error(str(e))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point for the fpinv command"""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    validate_args(parser, args)
    try:
        return asyncio.run(COMMANDS[args.command](args))
    except ValueError as e:
        print(f"fpinv: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
