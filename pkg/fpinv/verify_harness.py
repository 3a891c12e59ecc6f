"""
Desk-scale verification of the fixed-point limit theorems.

Each runner builds exact finite-n laws, rescales them the way its theorem
prescribes, measures the distance to the limit law over a sweep of n and
records named threshold checks. Reports are plain frozen dataclasses; emit.py
turns them into canonical JSON.
"""

import asyncio
import dataclasses
import logging
import math
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from fpinv import __version__, gf_engine, limit_laws, perm_core, shape_engine
from fpinv.fp_types import (
    Check,
    ExperimentReport,
    ExperimentSpec,
    FpDistribution,
    Parity,
    ReportRow,
    Scalar,
    SigmaClass,
    TiltedAlternatingGOE,
    WeightPolynomial,
    is_exact,
    parity_of,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Configuration
# ============================================================================


EXACT_MAX_N = 600  # above this, exact q is demoted to float before normalizing

# Distance thresholds: (smallest n the threshold applies to, threshold)
THRESHOLDS: Dict[str, Tuple[int, float]] = {
    "T1": (40, 0.02),
    "T2even": (400, 0.08),
    "T2odd": (240, 0.1),
    "T3a": (100, 0.035),
    "T3b": (2000, 0.03),
    "T3c": (500, 0.06),
    "T4": (500, 0.05),
}
MEAN_TOLERANCE = 0.01
T4_VARIANCE_TOLERANCE = 0.03
ADJUDICATION_WIN = 0.05
ADJUDICATION_LOSE = 0.20
ANCHOR_KS = 0.01
ANCHOR_TILTED_KS = 0.02
EXACT_NOISE = 0.005
MONTE_CARLO_NOISE = 0.01
NORMALIZER_TOLERANCE = 1e-12

RUNNER_ENGINES: Dict[str, Tuple[str, ...]] = {
    "T1": ("shape", "bruteforce"),
    "T2": ("shape",),
    "T3": ("gf", "path", "bruteforce"),
    "T4": ("gf", "bruteforce"),
    "cross": ("path",),
    "anchor": ("montecarlo",),
}

LENGTH3_CLASSES: Tuple[Tuple[str, SigmaClass], ...] = (
    ("321", SigmaClass.CLASS321),
    ("132", SigmaClass.CLASS321),
    ("213", SigmaClass.CLASS321),
    ("231", SigmaClass.CLASS231),
    ("312", SigmaClass.CLASS231),
)


# ============================================================================
# Pure Functions - No side effects, deterministic
# ============================================================================


def runner_key(theorem: str) -> str:
    """T3a/T3b/T3c share the T3 runner."""
    return "T3" if theorem.startswith("T3") else theorem


def validate_spec(spec: ExperimentSpec) -> None:
    """Raise ValueError when the engine or n range cannot serve the runner."""
    key = runner_key(spec.theorem)
    if key not in RUNNER_ENGINES:
        raise ValueError(f"Unknown theorem: {spec.theorem}")
    if spec.engine not in RUNNER_ENGINES[key]:
        raise ValueError(
            f"Engine {spec.engine} cannot run {spec.theorem}; "
            f"use one of {', '.join(RUNNER_ENGINES[key])}"
        )
    if key in ("T1", "T2", "T3", "T4") and not spec.n_list:
        raise ValueError("n_list must be nonempty")
    if any(n < 0 for n in spec.n_list):
        raise ValueError(f"n values must be nonnegative: {spec.n_list}")
    if spec.q <= 0:
        raise ValueError(f"q must be positive, got {spec.q}")
    if spec.engine == "bruteforce" and max(spec.n_list) > perm_core.BRUTE_FORCE_MAX_N:
        raise ValueError(
            f"bruteforce engine is limited to n <= {perm_core.BRUTE_FORCE_MAX_N}"
        )
    if key in ("T1", "T2") and (spec.k is None or spec.k < 1):
        raise ValueError(f"{spec.theorem} needs k >= 1, got {spec.k}")
    if key == "T1" and spec.parity not in ("even", "odd"):
        raise ValueError(f"T1 needs a parity, got {spec.parity}")
    if key == "T2" and not 0 < spec.q <= 1:
        raise ValueError(f"T2 needs 0 < q <= 1, got {spec.q}")
    if key == "T2" and spec.k != 2 and spec.samples < 1:
        raise ValueError("T2 with k != 2 needs a positive sample count")


def _bias(q: Scalar, n: int) -> Scalar:
    """Exact q up to EXACT_MAX_N, float beyond."""
    return q if is_exact(q) and n <= EXACT_MAX_N else float(q)


def _moments(d: FpDistribution) -> Tuple[float, float]:
    mean, variance = gf_engine.exact_moments(d)
    return float(mean), float(variance)


def _relative_error(value: float, target: float) -> float:
    return abs(value - target) / abs(target)


def _threshold_check(
    name: str, rows: Sequence[ReportRow], key: str, warnings: List[str]
) -> List[Check]:
    """Distance threshold at the largest n at or beyond the key's reference n."""
    min_n, threshold = THRESHOLDS[key]
    eligible = [row for row in rows if row.n >= min_n]
    if not eligible:
        warnings.append(
            f"{name}: no n >= {min_n} in the sweep; distance threshold not asserted"
        )
        return []
    row = max(eligible, key=lambda r: r.n)
    return [
        Check(
            name=name,
            value=row.distance,
            threshold=threshold,
            passed=row.distance < threshold,
            detail=f"{row.distance_type} at n={row.n}",
        )
    ]


def trend_check(name: str, values: Sequence[float], noise: float) -> Optional[Check]:
    """Non-increasing up to an additive noise allowance; None below two points."""
    if len(values) < 2:
        return None
    worst = max(b - a for a, b in zip(values, values[1:]))
    return Check(
        name=name,
        value=max(worst, 0.0),
        threshold=noise,
        passed=worst <= noise,
        detail="largest increase between consecutive n",
    )


def _report(
    spec: ExperimentSpec,
    rows: Sequence[ReportRow],
    checks: Sequence[Optional[Check]],
    verdicts: Sequence[Tuple[str, float]] = (),
    warnings: Sequence[str] = (),
    started: float = 0.0,
    vacuous: bool = False,
) -> ExperimentReport:
    elapsed = time.perf_counter() - started if started else 0.0
    asserted = [c for c in checks if c is not None]
    if not asserted:
        # nothing was measured against a threshold; fail rather than pass empty
        asserted.append(
            Check(
                name="no_assertion",
                value=float(len(rows)),
                threshold=0.0,
                passed=False,
                detail="no n in the sweep qualified for any check",
            )
        )
        vacuous = True
    report = ExperimentReport(
        spec=spec,
        rows=tuple(rows),
        verdicts=tuple((label, float(value)) for label, value in verdicts),
        checks=tuple(asserted),
        warnings=tuple(warnings),
        version=__version__,
        wall_clock=elapsed,
        vacuous=vacuous,
    )
    for warning in report.warnings:
        logger.warning("%s: %s", spec.theorem, warning)
    logger.info(
        "%s q=%s finished in %.2fs: %s",
        spec.theorem,
        spec.q,
        elapsed,
        "pass" if report.passed else "FAIL",
    )
    return report


# ----------------------------------------------------------------------------
# T1: monotone patterns at fixed q
# ----------------------------------------------------------------------------


def _monotone_row(n: int, k: int, engine: str) -> WeightPolynomial:
    if engine == "bruteforce":
        pattern = shape_engine.monotone_pattern(k, "increasing")
        return perm_core.brute_force_weights(n, pattern)
    return shape_engine.monotone_weights(n, k, "increasing")


def run_t1(
    k: int,
    q: Scalar,
    parity: Parity,
    n_list: Sequence[int],
    engine: str = "shape",
) -> ExperimentReport:
    """TV between the exact law for Inc(k+1) and the parity-class pmf
    proportional to q^i C(k, i); n of the other parity are skipped."""
    spec = ExperimentSpec(
        theorem="T1",
        q=q,
        n_list=tuple(n_list),
        engine=engine,
        k=k,
        direction="increasing",
        parity=parity,
    )
    validate_spec(spec)
    started = time.perf_counter()
    if engine == "shape":
        shape_engine.ensure_certified()

    warnings: List[str] = []
    limit = limit_laws.law_table(limit_laws.limit_law_for("T1", float(q), parity, k))
    rows: List[ReportRow] = []
    for n in sorted(n_list):
        if parity_of(n) != parity:
            warnings.append(f"n={n} has the wrong parity for {parity}; skipped")
            continue
        d = perm_core.biased_distribution(_monotone_row(n, k, engine), _bias(q, n))
        mean, variance = _moments(d)
        rows.append(
            ReportRow(
                n=n,
                distance=limit_laws.tv_distance(d, limit),
                distance_type="TV",
                mean=mean,
                variance=variance,
            )
        )

    published = limit_laws.published_normalizer(k, float(q))
    ratio = published / limit_laws.parity_normalizer(k, float(q), parity)
    if abs(ratio - 1) > NORMALIZER_TOLERANCE:
        warnings.append(
            f"published normalizer differs from the parity-class sum by a "
            f"factor of {ratio:.6g}"
        )
    checks = _threshold_check("tv_limit", rows, "T1", warnings) + [
        trend_check("tv_trend", [r.distance for r in rows], EXACT_NOISE)
    ]
    verdicts = [("published_normalizer_ratio", ratio)]
    return _report(spec, rows, checks, verdicts, warnings, started)


# ----------------------------------------------------------------------------
# T2: monotone patterns with bias q^{sqrt(k/n)}
# ----------------------------------------------------------------------------


def run_t2(
    k: int,
    q: Scalar,
    n_list: Sequence[int],
    samples: int = 0,
    seed: int = 0,
) -> ExperimentReport:
    """KS between the rescaled exact Dec(k+1) law at bias q^{sqrt(k/n)} and
    the tilted alternating-eigenvalue law (analytic for k = 2)."""
    spec = ExperimentSpec(
        theorem="T2",
        q=q,
        n_list=tuple(n_list),
        engine="shape",
        k=k,
        direction="decreasing",
        samples=samples,
        seed=seed,
    )
    validate_spec(spec)
    started = time.perf_counter()
    shape_engine.ensure_certified()

    warnings: List[str] = []
    verdicts: List[Tuple[str, float]] = []
    law: Optional[TiltedAlternatingGOE] = None
    if samples > 0:
        law = limit_laws.goe_limit_law(k, float(q), samples, seed)
        verdicts.append(("ess", law.sample.ess))
        if law.sample.low_ess:
            warnings.append(
                f"low effective sample size {law.sample.ess:.1f} of {samples}"
            )

    limit_cdf: Callable
    noise = EXACT_NOISE
    if k == 2:
        limit_cdf = limit_laws.tilted_rayleigh2_cdf(float(q))
        if law is not None:
            # the sample is diagnostic only; rows use the closed form
            warnings.append("k=2 rows use the closed-form cdf, not the GOE sample")
            sample_ks = limit_laws.weighted_ks(law.sample, limit_cdf)
            verdicts.append(("sample_ks", sample_ks))
    elif law is not None:
        limit_cdf = limit_laws.law_cdf(law)
        noise = MONTE_CARLO_NOISE
    else:
        raise ValueError(f"k={k} needs a positive sample count")

    rows: List[ReportRow] = []
    for n in sorted(n_list):
        if n == 0:
            warnings.append("n=0 cannot be rescaled; skipped")
            continue
        qn = float(q) ** math.sqrt(k / n)
        d = perm_core.biased_distribution(
            shape_engine.monotone_weights(n, k, "decreasing"), qn
        )
        scale = math.sqrt(n / k)
        center = 0.0 if k % 2 == 0 else n / k
        mean, variance = _moments(d)
        rows.append(
            ReportRow(
                n=n,
                distance=limit_laws.ks_distance(d, limit_cdf, center, scale),
                distance_type="KS",
                mean=mean,
                variance=variance,
                extras=(("bias", qn),),
            )
        )
    key = "T2even" if k % 2 == 0 else "T2odd"
    checks = _threshold_check("ks_limit", rows, key, warnings) + [
        trend_check("ks_trend", [r.distance for r in rows], noise)
    ]
    return _report(spec, rows, checks, verdicts, warnings, started)


# ----------------------------------------------------------------------------
# T3: Class321 in its three regimes
# ----------------------------------------------------------------------------


def _class_row(sigma_class: SigmaClass, n: int, engine: str) -> WeightPolynomial:
    if engine == "bruteforce":
        tag = "321" if sigma_class == SigmaClass.CLASS321 else "231"
        return perm_core.brute_force_weights(n, tag)
    return gf_engine.class_row(sigma_class, n, engine)


def _run_subcritical(spec: ExperimentSpec, started: float) -> ExperimentReport:
    warnings: List[str] = []
    rows: List[ReportRow] = []
    for n in sorted(spec.n_list):
        d = perm_core.biased_distribution(
            _class_row(SigmaClass.CLASS321, n, spec.engine), _bias(spec.q, n)
        )
        law = limit_laws.limit_law_for("T3a", float(spec.q), parity_of(n))
        limit = limit_laws.law_table(law)
        mean, variance = _moments(d)
        rows.append(
            ReportRow(
                n=n,
                distance=limit_laws.tv_distance(d, limit),
                distance_type="TV",
                mean=mean,
                variance=variance,
                extras=(("parity", float(n % 2)),),
            )
        )
    checks: List[Optional[Check]] = []
    for parity in ("even", "odd"):
        same = [r for r in rows if parity_of(r.n) == parity]
        if same:
            checks += _threshold_check(f"tv_limit_{parity}", same, "T3a", warnings)
            distances = [r.distance for r in same]
            checks.append(trend_check(f"tv_trend_{parity}", distances, EXACT_NOISE))
    return _report(spec, rows, checks, (), warnings, started)


def _run_critical(spec: ExperimentSpec, started: float) -> ExperimentReport:
    warnings: List[str] = []
    limit_cdf = limit_laws.law_cdf(limit_laws.limit_law_for("T3b", float(spec.q)))
    rows: List[ReportRow] = []
    for n in sorted(spec.n_list):
        if n == 0:
            warnings.append("n=0 cannot be rescaled; skipped")
            continue
        d = perm_core.biased_distribution(
            _class_row(SigmaClass.CLASS321, n, spec.engine), _bias(spec.q, n)
        )
        mean, variance = _moments(d)
        rows.append(
            ReportRow(
                n=n,
                distance=limit_laws.ks_distance(
                    d, limit_cdf, 0.0, math.sqrt(n)
                ),
                distance_type="KS",
                mean=mean,
                variance=variance,
            )
        )
    checks = _threshold_check("ks_limit", rows, "T3b", warnings) + [
        trend_check("ks_trend", [r.distance for r in rows], EXACT_NOISE)
    ]
    return _report(spec, rows, checks, (), warnings, started)


def adjudicate(
    candidates: Sequence[Tuple[str, float]]
) -> Tuple[Optional[str], Check]:
    """Winner among (label, relative error) pairs: exactly one below
    ADJUDICATION_WIN with every other above ADJUDICATION_LOSE."""
    winners = [label for label, err in candidates if err < ADJUDICATION_WIN]
    losers = [label for label, err in candidates if err > ADJUDICATION_LOSE]
    unique = len(winners) == 1 and len(losers) == len(candidates) - 1
    winner = winners[0] if unique else None
    best = min(err for _, err in candidates)
    return winner, Check(
        name="variance_adjudication",
        value=best,
        threshold=ADJUDICATION_WIN,
        passed=winner is not None,
        detail=f"winner={winner}" if winner else "no unique candidate",
    )


def _run_supercritical(spec: ExperimentSpec, started: float) -> ExperimentReport:
    warnings: List[str] = []
    normal_cdf = limit_laws.law_cdf(limit_laws.limit_law_for("T3c", float(spec.q)))
    constants = limit_laws.class_constants(SigmaClass.CLASS321, float(spec.q))
    candidates = dict(constants.variance_slope_candidates)
    built: List[Tuple[int, FpDistribution, float, float]] = []
    for n in sorted(spec.n_list):
        if n == 0:
            warnings.append("n=0 cannot be rescaled; skipped")
            continue
        d = perm_core.biased_distribution(
            _class_row(SigmaClass.CLASS321, n, spec.engine), _bias(spec.q, n)
        )
        built.append((n, d) + _moments(d))
    if not built:
        raise ValueError("T3c needs at least one positive n")

    n_top, _, mean_top, var_top = built[-1]
    errors = [
        (label, _relative_error(var_top / n_top, v)) for label, v in candidates.items()
    ]
    winner, adjudication = adjudicate(errors)
    scale_label = winner or "rederived"

    rows: List[ReportRow] = []
    for n, d, mean, variance in built:
        ks_by_label = {
            label: limit_laws.ks_distance(
                d,
                normal_cdf,
                constants.mean_slope * n,
                math.sqrt(v * n),
            )
            for label, v in candidates.items()
        }
        rows.append(
            ReportRow(
                n=n,
                distance=ks_by_label[scale_label],
                distance_type="KS",
                mean=mean,
                variance=variance,
                extras=tuple(
                    (f"ks:{label}", ks) for label, ks in ks_by_label.items()
                ),
            )
        )

    mean_error = _relative_error(mean_top / n_top, constants.mean_slope)
    numeric_mean, numeric_var = limit_laws.rederive_slopes(
        SigmaClass.CLASS321, float(spec.q)
    )
    rederived_gap = max(
        abs(numeric_mean - constants.mean_slope),
        abs(numeric_var - candidates["rederived"]),
    )
    checks = [
        Check(
            name="mean_slope",
            value=mean_error,
            threshold=MEAN_TOLERANCE,
            passed=mean_error < MEAN_TOLERANCE,
            detail=f"mean/n at n={n_top}",
        ),
        adjudication,
        Check(
            name="rederived_closed_form",
            value=rederived_gap,
            threshold=1e-6,
            passed=rederived_gap < 1e-6,
            detail="numeric derivatives of the singular point",
        ),
    ]
    checks += _threshold_check("ks_limit", rows, "T3c", warnings)
    checks.append(trend_check("ks_trend", [r.distance for r in rows], EXACT_NOISE))
    verdicts = [("mean_slope", mean_error)]
    verdicts += [(f"variance:{label}", err) for label, err in errors]
    return _report(spec, rows, checks, verdicts, warnings, started)


def run_t3(q: Scalar, n_list: Sequence[int], engine: str = "gf") -> ExperimentReport:
    """Class321 fixed points against the regime's limit: parity-split
    Negative Binomial for q < 1, Rayleigh at q = 1, normal for q > 1."""
    regime = gf_engine.phase(q)
    theorem = {"subcritical": "T3a", "critical": "T3b", "supercritical": "T3c"}[regime]
    spec = ExperimentSpec(
        theorem=theorem, q=q, n_list=tuple(n_list), engine=engine, sigma="c321"
    )
    validate_spec(spec)
    started = time.perf_counter()
    logger.info("T3 q=%s is %s", q, regime)
    if regime == "subcritical":
        return _run_subcritical(spec, started)
    elif regime == "critical":
        return _run_critical(spec, started)
    else:
        return _run_supercritical(spec, started)


# ----------------------------------------------------------------------------
# T4: Class231
# ----------------------------------------------------------------------------


def run_t4(q: Scalar, n_list: Sequence[int], engine: str = "gf") -> ExperimentReport:
    """Class231 mean and variance slopes and the standardized normal limit."""
    spec = ExperimentSpec(
        theorem="T4", q=q, n_list=tuple(n_list), engine=engine, sigma="c231"
    )
    validate_spec(spec)
    started = time.perf_counter()
    warnings: List[str] = []
    constants = limit_laws.class_constants(SigmaClass.CLASS231, float(q))
    normal_cdf = limit_laws.law_cdf(limit_laws.limit_law_for("T4", float(q)))
    variance_slope = constants.variance_slope_candidates[0][1]

    rows: List[ReportRow] = []
    for n in sorted(n_list):
        if n == 0:
            warnings.append("n=0 cannot be rescaled; skipped")
            continue
        d = perm_core.biased_distribution(
            _class_row(SigmaClass.CLASS231, n, engine), _bias(q, n)
        )
        mean, variance = _moments(d)
        rows.append(
            ReportRow(
                n=n,
                distance=limit_laws.ks_distance(
                    d,
                    normal_cdf,
                    constants.mean_slope * n,
                    math.sqrt(variance_slope * n),
                ),
                distance_type="KS",
                mean=mean,
                variance=variance,
                extras=(
                    ("mean_error", _relative_error(mean / n, constants.mean_slope)),
                    ("variance_error", _relative_error(variance / n, variance_slope)),
                ),
            )
        )
    if not rows:
        raise ValueError("T4 needs at least one positive n")

    top = rows[-1]
    extras = dict(top.extras)
    numeric_mean, numeric_var = limit_laws.rederive_slopes(
        SigmaClass.CLASS231, float(q)
    )
    rederived_gap = max(
        abs(numeric_mean - constants.mean_slope), abs(numeric_var - variance_slope)
    )
    checks: List[Optional[Check]] = [
        Check(
            name="mean_slope",
            value=extras["mean_error"],
            threshold=MEAN_TOLERANCE,
            passed=extras["mean_error"] < MEAN_TOLERANCE,
            detail=f"mean/n at n={top.n}",
        ),
        Check(
            name="variance_slope",
            value=extras["variance_error"],
            threshold=T4_VARIANCE_TOLERANCE,
            passed=extras["variance_error"] < T4_VARIANCE_TOLERANCE,
            detail=f"variance/n at n={top.n}",
        ),
        Check(
            name="rederived_closed_form",
            value=rederived_gap,
            threshold=1e-6,
            passed=rederived_gap < 1e-6,
            detail="numeric derivatives of the singular point",
        ),
        trend_check(
            "mean_error_trend",
            [dict(r.extras)["mean_error"] for r in rows],
            EXACT_NOISE,
        ),
        trend_check("ks_trend", [r.distance for r in rows], EXACT_NOISE),
    ]
    checks += _threshold_check("ks_limit", rows, "T4", warnings)
    verdicts = [
        ("mean_slope", extras["mean_error"]),
        ("variance:published", extras["variance_error"]),
    ]
    return _report(spec, rows, checks, verdicts, warnings, started)


# ----------------------------------------------------------------------------
# Engine cross-checks and the GOE anchor
# ----------------------------------------------------------------------------


def first_mismatch(
    fast: Sequence[WeightPolynomial], slow: Sequence[WeightPolynomial]
) -> Optional[Tuple[int, int, int, int]]:
    """(n, j, fast, slow) at the first differing coefficient, or None."""
    for a, b in zip(fast, slow):
        for j in range(max(a.n, b.n) + 1):
            if a[j] != b[j]:
                return a.n, j, a[j], b[j]
    return None


def _mismatch_check(name: str, mismatch: Optional[Tuple[int, int, int, int]]) -> Check:
    if mismatch is None:
        return Check(name=name, value=0.0, threshold=0.0, passed=True)
    n, j, fast, slow = mismatch
    return Check(
        name=name,
        value=1.0,
        threshold=0.0,
        passed=False,
        detail=f"n={n} j={j}: {fast} != {slow}",
    )


def cross_engine_check(
    n_max_poly: int = gf_engine.POLY_ROW_CAP,
    n_max_path: int = 400,
    n_max_brute: int = 10,
    n_max_shape: int = shape_engine.CERTIFY_MAX_N,
) -> ExperimentReport:
    """Every engine against its oracle; mismatches become failed checks."""
    if not 0 <= n_max_poly <= gf_engine.POLY_ROW_CAP:
        raise ValueError(
            f"n_max_poly must be in 0..{gf_engine.POLY_ROW_CAP}, got {n_max_poly}"
        )
    spec = ExperimentSpec(
        theorem="cross", q=1, n_list=(n_max_poly, n_max_path), engine="path"
    )
    started = time.perf_counter()
    warnings: List[str] = []
    checks: List[Check] = []

    n_brute = min(n_max_brute, perm_core.BRUTE_FORCE_MAX_N)
    tables = {
        SigmaClass.CLASS321: gf_engine.expand_class321(n_brute).rows,
        SigmaClass.CLASS231: gf_engine.expand_class231(n_brute).rows,
    }
    for tag, sigma_class in LENGTH3_CLASSES:
        brute = [perm_core.brute_force_weights(n, tag) for n in range(n_brute + 1)]
        mismatch = first_mismatch(tables[sigma_class], brute)
        checks.append(_mismatch_check(f"gf_vs_bruteforce_{tag}", mismatch))

    path = gf_engine.path_weights(max(n_max_poly, n_max_path)).rows
    poly = gf_engine.expand_class321(n_max_poly).rows
    mismatch = first_mismatch(path[: n_max_poly + 1], poly)
    checks.append(_mismatch_check("path_vs_gf", mismatch))
    ballot = [
        WeightPolynomial(
            n=n, coeffs=tuple(gf_engine.ballot_number(n, j) for j in range(n + 1))
        )
        for n in range(n_max_path + 1)
    ]
    mismatch = first_mismatch(path[: n_max_path + 1], ballot)
    checks.append(_mismatch_check("path_vs_ballot", mismatch))

    shape_mismatches = shape_engine.certification_mismatches(n_max_shape)
    if shape_mismatches:
        n, k, direction, j, fast, slow = shape_mismatches[0]
        checks.append(
            Check(
                name="shape_vs_bruteforce",
                value=float(len(shape_mismatches)),
                threshold=0.0,
                passed=False,
                detail=f"n={n} k={k} {direction} j={j}: {fast} != {slow}",
            )
        )
    else:
        checks.append(
            Check(name="shape_vs_bruteforce", value=0.0, threshold=0.0, passed=True)
        )

    vacuous = n_max_poly == 0
    if vacuous:
        warnings.append("n_max_poly=0: path versus gf comparison is vacuous")
    return _report(spec, (), checks, (), warnings, started, vacuous=vacuous)


def anchor_check(
    q: Scalar = 1, samples: int = 1_000_000, seed: int = 0, k: int = 2
) -> ExperimentReport:
    """The k=2 weighted GOE sample against sqrt(2)*Rayleigh(1) (q = 1) or the
    closed-form tilted cdf (q < 1)."""
    if k != 2:
        raise ValueError(f"Only k=2 has an analytic anchor, got k={k}")
    spec = ExperimentSpec(
        theorem="anchor",
        q=q,
        n_list=(),
        engine="montecarlo",
        k=k,
        samples=samples,
        seed=seed,
    )
    validate_spec(spec)
    started = time.perf_counter()
    warnings: List[str] = []
    sample = limit_laws.xk_weighted_sample(k, float(q), samples, seed)
    if sample.low_ess:
        warnings.append(f"low effective sample size {sample.ess:.1f} of {samples}")

    if float(q) == 1.0:
        cdf = limit_laws.sqrt2_rayleigh_cdf
        threshold = max(ANCHOR_KS, limit_laws.ks_critical_value(samples))
    else:
        cdf = limit_laws.tilted_rayleigh2_cdf(float(q))
        threshold = ANCHOR_TILTED_KS
    ks = limit_laws.weighted_ks(sample, cdf)

    closed = limit_laws.tilted_rayleigh2_cdf(float(q))
    oracle_gap = max(
        abs(closed(x) - limit_laws.tilted_rayleigh2_cdf_quad(float(q), x))
        for x in (0.5, 1.0, 2.0, 4.0)
    )
    checks = [
        Check(
            name="ks_anchor",
            value=ks,
            threshold=threshold,
            passed=ks < threshold,
            detail=f"weighted KS over {samples} draws",
        ),
        Check(
            name="closed_form_vs_quadrature",
            value=oracle_gap,
            threshold=1e-8,
            passed=oracle_gap < 1e-8,
        ),
    ]
    verdicts = [
        ("ess", sample.ess),
        ("ks_critical_value", limit_laws.ks_critical_value(samples)),
    ]
    return _report(spec, (), checks, verdicts, warnings, started)


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Dispatch a spec to its runner."""
    validate_spec(spec)
    key = runner_key(spec.theorem)
    if key == "T1":
        return run_t1(spec.k, spec.q, spec.parity, spec.n_list, spec.engine)
    elif key == "T2":
        return run_t2(spec.k, spec.q, spec.n_list, spec.samples, spec.seed)
    elif key == "T3":
        return run_t3(spec.q, spec.n_list, spec.engine)
    elif key == "T4":
        return run_t4(spec.q, spec.n_list, spec.engine)
    elif key == "cross":
        poly, path = (spec.n_list + (gf_engine.POLY_ROW_CAP, 400))[:2]
        return cross_engine_check(poly, path)
    else:
        return anchor_check(spec.q, spec.samples, spec.seed, spec.k or 2)


def cell_seed(seed: int, index: int) -> int:
    """Seed of sweep cell `index`, independent of scheduling order."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def sweep_cells(specs: Sequence[ExperimentSpec]) -> List[ExperimentSpec]:
    """Specs with per-cell seeds for the sampling runners."""
    return [
        dataclasses.replace(spec, seed=cell_seed(spec.seed, index))
        if runner_key(spec.theorem) in ("T2", "anchor")
        else spec
        for index, spec in enumerate(specs)
    ]


# ============================================================================
# Async I/O Functions - Side effects isolated here
# ============================================================================


async def run_sweep(specs: Sequence[ExperimentSpec]) -> List[ExperimentReport]:
    """Run independent cells concurrently; results keep the input order."""
    cells = sweep_cells(specs)
    for cell in cells:
        validate_spec(cell)
    logger.info("running sweep of %d cells", len(cells))
    return list(
        await asyncio.gather(*(asyncio.to_thread(run_experiment, c) for c in cells))
    )

