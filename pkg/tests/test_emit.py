"""Tests for the text codecs and report files."""

from datetime import datetime, timezone
from fractions import Fraction
import json
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent))

import pytest

from fpinv.emit import (
    distribution_to_csv,
    distribution_to_json,
    enumeration_listing,
    format_scalar,
    parse_scalar,
    report_filename,
    report_from_dict,
    report_rows_csv,
    report_to_dict,
    report_to_json,
    sample_to_csv,
    weights_to_csv,
    weights_to_json,
    write_text,
)
from fpinv.fp_types import Permutation, WeightPolynomial
from fpinv.limit_laws import xk_weighted_sample
from fpinv.perm_core import biased_distribution
from fpinv.verify_harness import run_t1, run_t4

FIXED_TIME = datetime(2026, 1, 1, tzinfo=timezone.utc)


class TestScalars:
    """Test scalar rendering."""

    def test_format(self):
        """Rationals as num/den, integers bare, floats by repr."""
        assert format_scalar(Fraction(2, 3)) == "2/3"
        assert format_scalar(Fraction(4, 2)) == "2"
        assert format_scalar(3) == "3"
        assert format_scalar(0.5) == "0.5"

    def test_parse_inverts_format(self):
        """parse_scalar undoes format_scalar."""
        for value in (Fraction(2, 3), Fraction(7), 0.1, 2.0, 1e-20):
            parsed = parse_scalar(format_scalar(value))
            assert parsed == value
            assert type(parsed) is type(value)


class TestWeightsAndDistributions:
    """Test weight and distribution codecs."""

    def test_weights_csv(self):
        """Nonzero rows only."""
        w = WeightPolynomial(n=3, coeffs=(0, 2, 0, 1))
        assert weights_to_csv([w]) == "n,j,count\n3,1,2\n3,3,1\n"

    def test_weights_json_counts_as_strings(self):
        """Big counts survive JSON parsers without big ints."""
        w = WeightPolynomial(n=2, coeffs=(10**30, 0, 1))
        rows = json.loads(weights_to_json([w]))
        assert rows[0] == {"n": 2, "j": 0, "count": str(10**30)}

    def test_distribution(self):
        """Exact probabilities render as fractions."""
        d = biased_distribution(WeightPolynomial(n=3, coeffs=(0, 2, 0, 1)), Fraction(1))
        data = json.loads(distribution_to_json(d))
        assert data["probs"] == [{"j": 1, "p": "2/3"}, {"j": 3, "p": "1/3"}]
        assert data["mode"] == "exact"
        assert distribution_to_csv(d) == "j,p\n1,2/3\n3,1/3\n"

    def test_enumeration_listing(self):
        """Empty permutation prints as ()."""
        text = enumeration_listing([(Permutation(image=()), 0)])
        assert text == "() 0\ncount=1\n"

    def test_sample_csv(self):
        """Header carries k, q, seed and ess."""
        sample = xk_weighted_sample(2, 0.5, 5, seed=1)
        lines = sample_to_csv(sample).splitlines()
        assert lines[0].startswith("# k=2 q=0.5 seed=1 ess=")
        assert lines[1] == "value,weight"
        assert len(lines) == 7


class TestReports:
    """Test report serialization."""

    @pytest.fixture(scope="class")
    def report(self):
        return run_t4(1, [50, 100])

    def test_round_trip(self, report):
        """JSON decodes to an equal report."""
        decoded = report_from_dict(json.loads(report_to_json(report)))
        assert decoded == report
        assert report_to_json(decoded) == report_to_json(report)

    def test_wall_clock_on_request(self, report):
        """Canonical JSON leaves out the wall clock."""
        assert "wall_clock" not in report_to_dict(report)
        assert "wall_clock" in report_to_dict(report, include_wall_clock=True)

    def test_filename(self, report):
        """reports/{theorem}_{pattern-or-k}_{q}_{timestamp}.json"""
        assert report_filename(report, FIXED_TIME) == Path(
            "reports/T4_c231_1_20260101T000000Z.json"
        )
        t1 = run_t1(2, Fraction(1, 2), "even", [4])
        assert report_filename(t1, FIXED_TIME).name == "T1_k2_1-2_20260101T000000Z.json"

    def test_rows_csv(self, report):
        """One line per row plus a header."""
        lines = report_rows_csv([report]).splitlines()
        assert lines[0] == "theorem,q,n,distance,distance_type,mean,variance"
        assert len(lines) == 3
        assert lines[1].startswith("T4,1,50,")


class TestWriters:
    """Test the async file writer."""

    @pytest.mark.asyncio
    async def test_write_text(self, tmp_path):
        """Creates parents and leaves no temporary file."""
        path = tmp_path / "nested" / "out.json"
        await write_text(path, "{}\n")
        assert path.read_text() == "{}\n"
        assert [p.name for p in path.parent.iterdir()] == ["out.json"]
