"""
Text codecs for weights, distributions, samples and harness reports.

Everything here renders to str except the async writers at the bottom, which
are the only functions in the package that touch the filesystem.
"""

import asyncio
import csv
import hashlib
import io
import json
import os
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from fpinv.fp_types import (
    Check,
    ExperimentReport,
    ExperimentSpec,
    FpDistribution,
    Permutation,
    ReportRow,
    Scalar,
    WeightedSample,
    WeightPolynomial,
    is_exact,
)


# ============================================================================
# Configuration
# ============================================================================


REPORTS_DIR = Path("reports")
WEIGHT_FIELDS = ("n", "j", "count")
ROW_FIELDS = ("n", "distance", "distance_type", "mean", "variance")


# ============================================================================
# Pure Functions - No side effects, deterministic
# ============================================================================


def format_scalar(value: Scalar) -> str:
    """"num/den" for rationals ("num" when integral), repr for floats."""
    if is_exact(value):
        frac = Fraction(value)
        if frac.denominator == 1:
            return str(frac.numerator)
        return f"{frac.numerator}/{frac.denominator}"
    return repr(float(value))


def parse_scalar(text: str) -> Scalar:
    """Inverse of format_scalar."""
    if "/" in text or text.lstrip("-").isdigit():
        return Fraction(text)
    return float(text)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def canonical_json(obj: object) -> str:
    """Sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def weight_rows(polys: Sequence[WeightPolynomial]) -> List[Tuple[int, int, int]]:
    """(n, j, count) for every nonzero coefficient."""
    return [(w.n, j, w[j]) for w in polys for j in w.support()]


def weights_to_csv(polys: Sequence[WeightPolynomial]) -> str:
    return _csv_text(WEIGHT_FIELDS, weight_rows(polys))


def weights_to_json(polys: Sequence[WeightPolynomial]) -> str:
    # counts outgrow float precision quickly, so they travel as strings
    return canonical_json(
        [{"n": n, "j": j, "count": str(c)} for n, j, c in weight_rows(polys)]
    )


def distribution_to_dict(d: FpDistribution) -> Dict[str, Any]:
    return {
        "n": d.n,
        "q": format_scalar(d.q),
        "mode": d.mode,
        "probs": [{"j": j, "p": format_scalar(d.prob(j))} for j in d.support],
    }


def distribution_to_json(d: FpDistribution) -> str:
    return canonical_json(distribution_to_dict(d))


def distribution_to_csv(d: FpDistribution) -> str:
    return _csv_text(("j", "p"), ((j, format_scalar(d.prob(j))) for j in d.support))


def enumeration_listing(pairs: Sequence[Tuple[Permutation, int]]) -> str:
    """One "perm fp" line per involution and a final count line."""
    lines = [f"{pi} {fp}" for pi, fp in pairs]
    lines.append(f"count={len(pairs)}")
    return "\n".join(lines) + "\n"


def sample_to_csv(sample: WeightedSample) -> str:
    header = (
        f"# k={sample.k} q={sample.q!r} seed={sample.seed} "
        f"ess={sample.ess!r} count={sample.count}\n"
    )
    return header + _csv_text(
        ("value", "weight"),
        (
            (repr(float(v)), repr(float(w)))
            for v, w in zip(sample.values, sample.weights)
        ),
    )


def limit_values_to_json(
    law: str, values: Sequence[Tuple[float, float]], kind: str
) -> str:
    return canonical_json(
        {"law": law, "kind": kind, "values": [{"x": x, "y": y} for x, y in values]}
    )


def limit_values_to_csv(values: Sequence[Tuple[float, float]], kind: str) -> str:
    return _csv_text(("x", kind), ((repr(x), repr(y)) for x, y in values))


# ----------------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------------


def _spec_to_dict(spec: ExperimentSpec) -> Dict[str, Any]:
    return {
        "theorem": spec.theorem,
        "q": format_scalar(spec.q),
        "n_list": list(spec.n_list),
        "engine": spec.engine,
        "sigma": spec.sigma,
        "k": spec.k,
        "direction": spec.direction,
        "parity": spec.parity,
        "samples": spec.samples,
        "seed": spec.seed,
    }


def report_to_dict(
    report: ExperimentReport, include_wall_clock: bool = False
) -> Dict[str, Any]:
    """JSON-ready dict; wall-clock only on request so reruns compare equal."""
    data: Dict[str, Any] = {
        "spec": _spec_to_dict(report.spec),
        "rows": [
            {
                "n": row.n,
                "distance": row.distance,
                "distance_type": row.distance_type,
                "mean": row.mean,
                "variance": row.variance,
                "extras": [[label, value] for label, value in row.extras],
            }
            for row in report.rows
        ],
        "verdicts": [[label, value] for label, value in report.verdicts],
        "checks": [
            {
                "name": c.name,
                "value": c.value,
                "threshold": c.threshold,
                "passed": c.passed,
                "detail": c.detail,
            }
            for c in report.checks
        ],
        "warnings": list(report.warnings),
        "version": report.version,
        "vacuous": report.vacuous,
        "passed": report.passed,
    }
    if include_wall_clock:
        data["wall_clock"] = report.wall_clock
    return data


def report_from_dict(data: Dict[str, Any]) -> ExperimentReport:
    s = data["spec"]
    spec = ExperimentSpec(
        theorem=s["theorem"],
        q=parse_scalar(s["q"]),
        n_list=tuple(s["n_list"]),
        engine=s["engine"],
        sigma=s["sigma"],
        k=s["k"],
        direction=s["direction"],
        parity=s["parity"],
        samples=s["samples"],
        seed=s["seed"],
    )
    return ExperimentReport(
        spec=spec,
        rows=tuple(
            ReportRow(
                n=r["n"],
                distance=r["distance"],
                distance_type=r["distance_type"],
                mean=r["mean"],
                variance=r["variance"],
                extras=tuple((label, value) for label, value in r["extras"]),
            )
            for r in data["rows"]
        ),
        verdicts=tuple((label, value) for label, value in data["verdicts"]),
        checks=tuple(Check(**c) for c in data["checks"]),
        warnings=tuple(data["warnings"]),
        version=data["version"],
        wall_clock=data.get("wall_clock", 0.0),
        vacuous=data["vacuous"],
    )


def report_to_json(report: ExperimentReport, include_wall_clock: bool = False) -> str:
    return canonical_json(report_to_dict(report, include_wall_clock))


def reports_to_json(reports: Sequence[ExperimentReport]) -> str:
    if len(reports) == 1:
        return report_to_json(reports[0])
    return canonical_json([report_to_dict(r) for r in reports])


def report_digest(report: ExperimentReport) -> str:
    """sha256 of the canonical JSON bytes."""
    return hashlib.sha256(report_to_json(report).encode("utf-8")).hexdigest()


def report_rows_csv(reports: Sequence[ExperimentReport]) -> str:
    """Flat per-n rows, one block per report, tagged with theorem and q."""
    return _csv_text(
        ("theorem", "q") + ROW_FIELDS,
        (
            (
                r.spec.theorem,
                format_scalar(r.spec.q),
                row.n,
                repr(row.distance),
                row.distance_type,
                repr(row.mean),
                repr(row.variance),
            )
            for r in reports
            for row in r.rows
        ),
    )


def report_filename(
    report: ExperimentReport, timestamp: Optional[datetime] = None
) -> Path:
    """reports/{theorem}_{pattern-or-k}_{q}_{timestamp}.json"""
    spec = report.spec
    if spec.k is not None:
        tag = f"k{spec.k}"
    else:
        tag = spec.sigma or "all"
    when = (timestamp or datetime.now(timezone.utc)).strftime("%Y%m%dT%H%M%SZ")
    q = format_scalar(spec.q).replace("/", "-")
    return REPORTS_DIR / f"{spec.theorem}_{tag}_{q}_{when}.json"


# ============================================================================
# Async I/O Functions - Side effects isolated here
# ============================================================================


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="\n") as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


async def write_text(path: Path, text: str) -> Path:
    """Atomically write text to path off the event loop."""
    await asyncio.to_thread(_atomic_write_text, path, text)
    return path
