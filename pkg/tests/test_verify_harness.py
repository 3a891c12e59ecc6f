"""Tests for the theorem runners, engine cross-checks and sweeps."""

from collections import defaultdict
from fractions import Fraction
import math
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent))

import pytest

from fpinv import emit, gf_engine
from fpinv.fp_types import ExperimentSpec, SeriesTable, SigmaClass, WeightPolynomial
from fpinv.verify_harness import (
    adjudicate,
    anchor_check,
    cell_seed,
    cross_engine_check,
    run_experiment,
    run_sweep,
    run_t1,
    run_t2,
    run_t3,
    run_t4,
    sweep_cells,
    trend_check,
    validate_spec,
)


def checks_by_name(report):
    return {c.name: c for c in report.checks}


def faulty_path_weights(n_max):
    """Ballot walks that may dip to height -1."""
    rows = []
    counts = {0: 1}
    for n in range(n_max + 1):
        rows.append(
            WeightPolynomial(n=n, coeffs=tuple(counts.get(j, 0) for j in range(n + 1)))
        )
        nxt = defaultdict(int)
        for height, c in counts.items():
            for step in (1, -1):
                if height + step >= -1:
                    nxt[height + step] += c
        counts = dict(nxt)
    return SeriesTable(sigma_class=SigmaClass.CLASS321, rows=tuple(rows))


class TestHelpers:
    """Test trend checks, adjudication and spec validation."""

    def test_trend(self):
        """Increases within the noise allowance pass."""
        assert trend_check("t", [0.1, 0.05, 0.052], 0.005).passed
        assert not trend_check("t", [0.1, 0.2], 0.005).passed
        assert trend_check("t", [0.1], 0.005) is None

    def test_adjudicate(self):
        """Exactly one candidate must win clearly."""
        winner, check = adjudicate([("published", 0.5), ("rederived", 0.01)])
        assert winner == "rederived"
        assert check.passed
        winner, check = adjudicate([("published", 0.03), ("rederived", 0.01)])
        assert winner is None
        assert not check.passed

    @pytest.mark.parametrize(
        "spec",
        [
            ExperimentSpec(theorem="T4", q=1, n_list=(10,), engine="path"),
            ExperimentSpec(theorem="T2", q=2, n_list=(10,), engine="shape", k=2),
            ExperimentSpec(theorem="T1", q=1, n_list=(10,), engine="shape", k=2),
            ExperimentSpec(theorem="T3", q=1, n_list=(13,), engine="bruteforce"),
            ExperimentSpec(theorem="T2", q=1, n_list=(10,), engine="shape", k=3),
            ExperimentSpec(theorem="T9", q=1, n_list=(10,), engine="gf"),
        ],
    )
    def test_invalid_specs(self, spec):
        """Incompatible engines and missing parameters are rejected."""
        with pytest.raises(ValueError):
            validate_spec(spec)


class TestTheorem1:
    """Test the monotone-pattern runner at fixed q."""

    def test_k1_point_mass(self):
        """Even n avoiding 12 forces fp = 0."""
        report = run_t1(1, 2, "even", [10])
        assert report.rows[0].distance == pytest.approx(0.0, abs=1e-15)
        assert any("published normalizer" in w for w in report.warnings)

    def test_k2_even_q1(self):
        """k = 2 splits the even class evenly at every n."""
        report = run_t1(2, Fraction(1), "even", [10, 20, 40])
        assert [r.n for r in report.rows] == [10, 20, 40]
        assert all(r.distance < 1e-12 for r in report.rows)
        assert report.passed

    @pytest.mark.parametrize("k", [2, 3])
    @pytest.mark.parametrize("q", [Fraction(1, 2), Fraction(1), Fraction(2)])
    @pytest.mark.parametrize("parity,n", [("even", 40), ("odd", 41)])
    def test_grid(self, k, q, parity, n):
        """TV below 0.02 over k in {2, 3}, q in {1/2, 1, 2}, both parities."""
        report = run_t1(k, q, parity, [n])
        check = checks_by_name(report)["tv_limit"]
        assert check.threshold == 0.02
        assert check.passed
        assert report.rows[0].distance < 0.02

    def test_no_qualifying_n_fails(self):
        """A sweep whose only n is skipped asserts nothing and fails."""
        report = run_t1(2, 1, "odd", [40])
        assert report.rows == ()
        assert report.vacuous
        assert not report.passed
        assert checks_by_name(report)["no_assertion"].passed is False

    def test_wrong_parity_skipped(self):
        """Odd n under the even law is skipped with a warning."""
        report = run_t1(2, 1, "even", [9, 10])
        assert [r.n for r in report.rows] == [10]
        assert any("n=9" in w for w in report.warnings)


class TestTheorem2:
    """Test the scaled-bias runner."""

    def test_k2_q1(self):
        """KS against the untilted k=2 law shrinks with n."""
        report = run_t2(2, 1, [100, 200, 400])
        check = checks_by_name(report)["ks_limit"]
        assert check.threshold == 0.08
        assert check.passed
        assert report.rows[-1].distance < 0.08
        assert report.passed

    def test_k2_tilted(self):
        """q = 1/2 against the closed-form tilted cdf."""
        report = run_t2(2, Fraction(1, 2), [400])
        assert report.rows[0].distance < 0.08
        assert checks_by_name(report)["ks_limit"].threshold == 0.08
        bias = dict(report.rows[0].extras)["bias"]
        assert bias == pytest.approx(0.5 ** math.sqrt(2 / 400))

    def test_k2_sample_is_diagnostic(self):
        """Samples at k = 2 are recorded but rows use the closed form."""
        plain = run_t2(2, 1, [400])
        sampled = run_t2(2, 1, [400], samples=2000, seed=1)
        verdicts = dict(sampled.verdicts)
        assert verdicts["ess"] == pytest.approx(2000)
        assert 0.0 <= verdicts["sample_ks"] < 0.1
        assert any("closed-form" in w for w in sampled.warnings)
        assert sampled.rows[0].distance == plain.rows[0].distance

    def test_k3_monte_carlo(self):
        """k = 3 uses the centered scaling and a GOE sample."""
        report = run_t2(3, 1, [120], samples=20_000, seed=7)
        assert report.rows[0].distance < 0.15
        assert dict(report.verdicts)["ess"] == pytest.approx(20_000)
        # n = 120 is below the odd-k reference n
        assert report.vacuous
        assert not report.passed

    def test_k3_needs_samples(self):
        """Odd k without a sample has no limit law to compare against."""
        with pytest.raises(ValueError):
            run_t2(3, 1, [30])

    @pytest.mark.slow
    def test_k3_reference_n(self):
        """KS below 0.1 at n = 240 for odd k."""
        report = run_t2(3, 1, [120, 240], samples=200_000, seed=7)
        check = checks_by_name(report)["ks_limit"]
        assert check.threshold == 0.1
        assert check.passed


class TestTheorem3:
    """Test the Class321 runner in its three regimes."""

    def test_subcritical(self):
        """TV against the parity Negative Binomial decreases."""
        report = run_t3(Fraction(1, 2), [25, 50, 100])
        assert report.spec.theorem == "T3a"
        checks = checks_by_name(report)
        assert checks["tv_limit_even"].passed
        assert checks["tv_trend_even"].passed
        assert report.rows[-1].distance < 0.035

    def test_subcritical_odd(self):
        """Odd n compare against the odd law."""
        report = run_t3(Fraction(1, 2), [51, 101])
        assert checks_by_name(report)["tv_limit_odd"].passed

    def test_short_sweep_fails(self):
        """One n below the reference n yields a failing no_assertion check."""
        report = run_t3(Fraction(1, 2), [50])
        assert len(report.rows) == 1
        assert [c.name for c in report.checks] == ["no_assertion"]
        assert report.vacuous
        assert not report.passed
        assert any("not asserted" in w for w in report.warnings)

    def test_critical_small(self):
        """q = 1 dispatches to the Rayleigh comparison."""
        report = run_t3(1, [100, 200])
        assert report.spec.theorem == "T3b"
        assert 0.0 < report.rows[-1].distance < 0.15

    @pytest.mark.parametrize("q", [Fraction(3, 2), Fraction(2), Fraction(3)])
    def test_supercritical_adjudication(self, q):
        """Exact moments pick the rederived variance slope."""
        report = run_t3(q, [500])
        assert report.spec.theorem == "T3c"
        checks = checks_by_name(report)
        assert checks["variance_adjudication"].detail == "winner=rederived"
        assert checks["mean_slope"].passed
        assert checks["rederived_closed_form"].passed
        verdicts = dict(report.verdicts)
        assert verdicts["variance:rederived"] < 0.05
        assert verdicts["variance:published"] > 0.2

    def test_supercritical_ks(self):
        """Standardized law close to normal at q = 2."""
        report = run_t3(Fraction(2), [500])
        assert report.rows[0].distance < 0.06

    @pytest.mark.slow
    def test_critical_desk_scale(self):
        """KS below 0.03 at n = 2000 and decreasing."""
        report = run_t3(1, [500, 1000, 2000], engine="path")
        checks = checks_by_name(report)
        assert checks["ks_limit"].passed
        assert checks["ks_trend"].passed


class TestTheorem4:
    """Test the Class231 runner."""

    def test_q1(self):
        """Slopes 1/3 and 8/27 and a normal limit."""
        report = run_t4(1, [100, 200, 500])
        checks = checks_by_name(report)
        assert checks["mean_slope"].passed
        assert checks["variance_slope"].passed
        assert checks["mean_error_trend"].passed
        assert report.passed

    def test_q2(self):
        """KS below 0.05 at n = 500."""
        report = run_t4(2, [500])
        assert checks_by_name(report)["ks_limit"].passed


class TestCrossEngine:
    """Test the engine cross-check."""

    def test_all_pass(self):
        """Engines agree with their oracles."""
        report = cross_engine_check(n_max_poly=20, n_max_path=100, n_max_brute=8)
        assert report.passed
        assert not report.vacuous

    def test_vacuous(self):
        """n_max_poly = 0 is flagged."""
        report = cross_engine_check(n_max_poly=0, n_max_path=10, n_max_brute=4)
        assert report.vacuous
        assert report.passed
        assert any("vacuous" in w for w in report.warnings)

    def test_faulty_path_engine(self, monkeypatch):
        """A walk allowed below zero disagrees first at n=2, j=0."""
        monkeypatch.setattr(gf_engine, "path_weights", faulty_path_weights)
        report = cross_engine_check(n_max_poly=10, n_max_path=10, n_max_brute=4)
        assert not report.passed
        check = checks_by_name(report)["path_vs_gf"]
        assert not check.passed
        assert check.detail == "n=2 j=0: 2 != 1"


class TestAnchor:
    """Test the k=2 GOE anchor."""

    def test_small_sample(self):
        """Closed form matches quadrature; KS is small."""
        report = anchor_check(q=Fraction(1, 2), samples=20_000, seed=3)
        checks = checks_by_name(report)
        assert checks["closed_form_vs_quadrature"].passed
        assert checks["ks_anchor"].value < 0.03

    def test_rejects_k(self):
        """Only k = 2 is anchored."""
        with pytest.raises(ValueError):
            anchor_check(q=1, samples=10, k=3)

    @pytest.mark.slow
    def test_million(self):
        """10^6 draws at q = 1 and q = 1/2."""
        assert anchor_check(q=1, samples=1_000_000, seed=0).passed
        assert anchor_check(q=Fraction(1, 2), samples=1_000_000, seed=0).passed


class TestDeterminism:
    """Test that reruns give identical reports."""

    def test_exact_runner(self):
        """Same spec, same JSON bytes."""
        spec = ExperimentSpec(
            theorem="T4", q=Fraction(1), n_list=(50, 100), engine="gf"
        )
        a = emit.report_to_json(run_experiment(spec))
        b = emit.report_to_json(run_experiment(spec))
        assert a == b

    def test_monte_carlo_runner(self):
        """Same seed, same JSON bytes."""
        first = run_t2(3, 1, [30], samples=2000, seed=11)
        second = run_t2(3, 1, [30], samples=2000, seed=11)
        assert emit.report_digest(first) == emit.report_digest(second)


class TestSweep:
    """Test concurrent sweeps."""

    def test_cell_seeds(self):
        """Sampling cells get seeds from (seed, index)."""
        specs = [
            ExperimentSpec(
                theorem="T2",
                q=1,
                n_list=(30,),
                engine="shape",
                k=3,
                samples=10,
                seed=5,
            ),
            ExperimentSpec(theorem="T4", q=1, n_list=(30,), engine="gf", seed=5),
        ]
        cells = sweep_cells(specs)
        assert cells[0].seed == cell_seed(5, 0)
        assert cells[1].seed == 5
        assert cell_seed(5, 0) != cell_seed(5, 1)

    @pytest.mark.asyncio
    async def test_run_sweep_keeps_order(self):
        """Reports come back in input order."""
        specs = [
            ExperimentSpec(theorem="T4", q=q, n_list=(50, 100), engine="gf")
            for q in (Fraction(1), Fraction(2), Fraction(1, 2))
        ]
        reports = await run_sweep(specs)
        assert [r.spec.q for r in reports] == [1, 2, Fraction(1, 2)]
        assert all(len(r.rows) == 2 for r in reports)

    @pytest.mark.asyncio
    async def test_run_sweep_matches_serial(self):
        """Concurrent and serial runs agree."""
        specs = [
            ExperimentSpec(theorem="T3", q=q, n_list=(40,), engine="gf")
            for q in (Fraction(1, 2), Fraction(2))
        ]
        reports = await run_sweep(specs)
        serial = [run_experiment(s) for s in specs]
        assert [emit.report_to_json(r) for r in reports] == [
            emit.report_to_json(r) for r in serial
        ]
