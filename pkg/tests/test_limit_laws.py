"""Tests for limit laws, GOE sampling and distances."""

from fractions import Fraction
import math
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest

from fpinv.fp_types import (
    FpDistribution,
    MonotoneParity,
    NBParity,
    Rayleigh1,
    SigmaClass,
    StdNormal,
    TiltedAlternatingGOE,
)
from fpinv.limit_laws import (
    alternating_sum,
    class_constants,
    goe_limit_law,
    ks_critical_value,
    ks_distance,
    law_cdf,
    law_pmf,
    law_table,
    limit_law_for,
    limit_pgf_nb,
    merge_samples,
    monotone_parity_pmf,
    nb_parity_pmf,
    published_normalizer,
    parity_normalizer,
    rayleigh_cdf,
    rederive_slopes,
    sample_goe_traceless,
    sqrt2_rayleigh_cdf,
    std_normal_cdf,
    tilted_rayleigh2_cdf,
    tilted_rayleigh2_cdf_quad,
    tv_distance,
    weighted_empirical_cdf,
    weighted_ks,
    xk_weighted_sample,
)


def point_mass(j):
    return FpDistribution(n=j, q=Fraction(1), probs={j: Fraction(1)}, mode="exact")


class TestNegativeBinomialParity:
    """Test the parity-split Negative Binomial limit."""

    def test_even_zero(self):
        """P(0 | even) = 0.45 at q = 1/2."""
        assert nb_parity_pmf(0.5, "even", 0) == pytest.approx(0.45)

    def test_wrong_parity(self):
        """Odd i under the even law is zero."""
        assert nb_parity_pmf(0.5, "even", 1) == 0.0

    @pytest.mark.parametrize("parity", ["even", "odd"])
    def test_sums_to_one(self, parity):
        """Normalized over 0..200."""
        total = math.fsum(nb_parity_pmf(0.5, parity, i) for i in range(201))
        assert total == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("parity", ["even", "odd"])
    @pytest.mark.parametrize("u", [0.3, 0.7, 1.0])
    def test_pgf_closed_form(self, parity, u):
        """Summed pmf PGF equals the ratio of closed forms."""
        q = 0.5
        series = math.fsum(u**i * nb_parity_pmf(q, parity, i) for i in range(301))
        assert series == pytest.approx(limit_pgf_nb(q, parity, u), abs=1e-9)

    def test_rejects_q(self):
        """q must lie in (0, 1)."""
        with pytest.raises(ValueError):
            nb_parity_pmf(1.0, "even", 0)


class TestMonotoneParity:
    """Test the q^i C(k, i) parity laws."""

    def test_k2_q1(self):
        """Even class {0, 2} splits evenly."""
        assert monotone_parity_pmf(2, 1.0, "even", 0) == pytest.approx(0.5)
        assert monotone_parity_pmf(2, 1.0, "even", 2) == pytest.approx(0.5)

    def test_k1_even(self):
        """Only i = 0 is even."""
        assert monotone_parity_pmf(1, 3.0, "even", 0) == pytest.approx(1.0)

    def test_k3_q2_odd(self):
        """Masses 6 and 8 on {1, 3}."""
        assert monotone_parity_pmf(3, 2.0, "odd", 1) == pytest.approx(3 / 7)

    def test_rejects_out_of_range(self):
        """i must be in 0..k."""
        with pytest.raises(ValueError):
            monotone_parity_pmf(2, 1.0, "even", 4)

    def test_normalizers(self):
        """Parity-class sums; the published constant overshoots at k = 1."""
        assert parity_normalizer(3, 2.0, "odd") == pytest.approx(14.0)
        assert parity_normalizer(3, 2.0, "even") == pytest.approx(13.0)
        ratio = published_normalizer(1, 2.0) / parity_normalizer(1, 2.0, "even")
        assert ratio == pytest.approx(2.0)

    def test_law_dispatch(self):
        """law_pmf and law_cdf on discrete variants."""
        law = MonotoneParity(k=3, q=2.0, parity="odd")
        assert law_pmf(law, 3) == pytest.approx(8 / 14)
        assert law_cdf(law)(2.5) == pytest.approx(6 / 14)
        assert law_cdf(NBParity(q=0.5, parity="even"))(-1) == 0.0

    def test_limit_law_for_branches(self):
        """Each closed-form branch maps to its law."""
        assert limit_law_for("T1", 2.0, "odd", 3) == MonotoneParity(
            k=3, q=2.0, parity="odd"
        )
        assert limit_law_for("T3a", 0.5, "even") == NBParity(q=0.5, parity="even")
        assert limit_law_for("T3b", 1.0) == Rayleigh1()
        assert limit_law_for("T3c", 2.0) == StdNormal()
        assert limit_law_for("T4", 1.0) == StdNormal()
        with pytest.raises(ValueError):
            limit_law_for("T2", 1.0)

    def test_law_table(self):
        """Tables list the parity class only."""
        table = law_table(MonotoneParity(k=3, q=2.0, parity="odd"))
        assert table == pytest.approx({1: 6 / 14, 3: 8 / 14})
        nb = law_table(NBParity(q=0.5, parity="even"))
        assert nb[0] == pytest.approx(0.45)
        assert all(i % 2 == 0 for i in nb)
        with pytest.raises(ValueError):
            law_table(StdNormal())


class TestContinuousLaws:
    """Test the Rayleigh and normal cdfs."""

    def test_rayleigh(self):
        """0 at 0, 1 - e^{-1/2} at 1."""
        assert rayleigh_cdf(0.0) == 0.0
        assert rayleigh_cdf(-3.0) == 0.0
        assert rayleigh_cdf(1.0) == pytest.approx(1 - math.exp(-0.5), abs=1e-12)
        assert rayleigh_cdf(50.0) == pytest.approx(1.0)

    def test_normal(self):
        """Median, quantile, symmetry."""
        assert std_normal_cdf(0.0) == pytest.approx(0.5, abs=1e-12)
        assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
        for x in (0.3, 1.1, 2.7):
            total = std_normal_cdf(x) + std_normal_cdf(-x)
            assert total == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("q", [0.25, 0.5, 0.9])
    def test_tilted_closed_form_matches_quadrature(self, q):
        """Closed form and quadrature agree."""
        cdf = tilted_rayleigh2_cdf(q)
        for x in (0.2, 1.0, 2.5, 5.0):
            assert cdf(x) == pytest.approx(tilted_rayleigh2_cdf_quad(q, x), abs=1e-8)

    def test_tilted_at_q1_is_scaled_rayleigh(self):
        """No tilt leaves sqrt(2) * Rayleigh(1)."""
        cdf = tilted_rayleigh2_cdf(1.0)
        for x in (0.5, 1.5, 3.0):
            assert cdf(x) == pytest.approx(sqrt2_rayleigh_cdf(x), abs=1e-12)


class TestGaussianConstants:
    """Test the Gaussian-regime slopes."""

    def test_class321(self):
        """Mean slope and the two variance candidates."""
        c = class_constants(SigmaClass.CLASS321, 2.0)
        assert c.mean_slope == pytest.approx(0.6)
        assert dict(c.variance_slope_candidates) == {
            "published": pytest.approx(3.2),
            "rederived": pytest.approx(0.64),
        }

    def test_class231(self):
        """1/3 and 8/27 at q = 1."""
        c = class_constants(SigmaClass.CLASS231, 1.0)
        assert c.mean_slope == pytest.approx(1 / 3)
        assert c.variance_slope_candidates == (("published", pytest.approx(8 / 27)),)

    @pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
    def test_rederived_class321(self, q):
        """Numeric derivatives give the rederived variance, not the published one."""
        mean, variance = rederive_slopes(SigmaClass.CLASS321, q)
        c = class_constants(SigmaClass.CLASS321, q)
        assert mean == pytest.approx(c.mean_slope, rel=1e-9)
        rederived = dict(c.variance_slope_candidates)["rederived"]
        assert variance == pytest.approx(rederived, rel=1e-9)

    @pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
    def test_rederived_class231(self, q):
        """Both closed forms re-derive for Class231."""
        mean, variance = rederive_slopes(SigmaClass.CLASS231, q)
        c = class_constants(SigmaClass.CLASS231, q)
        assert mean == pytest.approx(c.mean_slope, rel=1e-9)
        assert variance == pytest.approx(c.variance_slope_candidates[0][1], rel=1e-9)


class TestGoeSampling:
    """Test the traceless GOE sampler and weighted samples."""

    def test_traceless_and_sorted(self):
        """Eigenvalues sum to zero and descend."""
        rng = np.random.default_rng(3)
        for k in (2, 3, 5):
            eigs = sample_goe_traceless(k, rng)
            assert abs(sum(eigs)) < 1e-10
            assert list(eigs) == sorted(eigs, reverse=True)

    def test_reproducible(self):
        """Same seed, identical stream."""
        a = sample_goe_traceless(4, np.random.default_rng(11))
        b = sample_goe_traceless(4, np.random.default_rng(11))
        assert a == b

    def test_alternating_sum(self):
        """Signs alternate from +."""
        assert alternating_sum((1.0, -1.0)) == pytest.approx(2.0)
        assert alternating_sum((1.0, 0.2, -1.2)) == pytest.approx(-0.4)
        with pytest.raises(ValueError):
            alternating_sum((0.0, 1.0))

    def test_even_k_nonnegative(self):
        """S_k >= 0 for even k."""
        sample = xk_weighted_sample(4, 1.0, 5000, seed=2)
        assert sample.values.min() >= -1e-10

    def test_q1_weights_equal(self):
        """No tilt, ESS equals the count."""
        sample = xk_weighted_sample(3, 1.0, 1000, seed=5)
        assert np.all(sample.weights == 1.0)
        assert sample.ess == pytest.approx(1000)
        assert not sample.low_ess

    def test_deterministic(self):
        """Same seed, same sample."""
        a = xk_weighted_sample(3, 0.5, 2000, seed=9)
        b = xk_weighted_sample(3, 0.5, 2000, seed=9)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.weights, b.weights)

    def test_goe_limit_law(self):
        """The law wraps the seeded sample; its cdf is the weighted ecdf."""
        law = goe_limit_law(3, 0.5, 2000, seed=9)
        assert isinstance(law, TiltedAlternatingGOE)
        direct = xk_weighted_sample(3, 0.5, 2000, seed=9)
        assert np.array_equal(law.sample.values, direct.values)
        cdf = law_cdf(law)
        assert cdf(law.sample.values.min() - 1.0) == 0.0
        assert cdf(law.sample.values.max()) == pytest.approx(1.0)
        mid = float(np.median(law.sample.values))
        assert 0.0 < cdf(mid) < 1.0

    def test_k2_matches_rayleigh(self):
        """S_2 is sqrt(2) * Rayleigh(1)."""
        sample = xk_weighted_sample(2, 1.0, 50_000, seed=1)
        assert weighted_ks(sample, sqrt2_rayleigh_cdf) < 0.015

    def test_k2_tilted(self):
        """Tilted sample matches the closed-form cdf."""
        sample = xk_weighted_sample(2, 0.5, 50_000, seed=4)
        assert weighted_ks(sample, tilted_rayleigh2_cdf(0.5)) < 0.02

    def test_merge(self):
        """Merging concatenates; mismatched laws are rejected."""
        a = xk_weighted_sample(3, 0.5, 300, seed=1)
        b = xk_weighted_sample(3, 0.5, 200, seed=2)
        merged = merge_samples(a, b)
        assert merged.count == 500
        assert 1.0 <= merged.ess <= 500
        with pytest.raises(ValueError):
            merge_samples(a, xk_weighted_sample(2, 0.5, 10, seed=1))

    def test_rejects_parameters(self):
        """k >= 2 and q in (0, 1]."""
        with pytest.raises(ValueError):
            xk_weighted_sample(1, 0.5, 10, seed=0)
        with pytest.raises(ValueError):
            xk_weighted_sample(2, 1.5, 10, seed=0)

    @pytest.mark.slow
    def test_anchor_million(self):
        """10^6 draws pass the 1% KS threshold."""
        sample = xk_weighted_sample(2, 1.0, 1_000_000, seed=0)
        assert weighted_ks(sample, sqrt2_rayleigh_cdf) < 0.01
        tilted = xk_weighted_sample(2, 0.5, 1_000_000, seed=0)
        assert weighted_ks(tilted, tilted_rayleigh2_cdf(0.5)) < 0.02


class TestDistances:
    """Test TV and KS distances."""

    def test_tv(self):
        """Identical, disjoint and half-overlapping laws."""
        half = FpDistribution(
            n=2,
            q=Fraction(1),
            probs={0: Fraction(1, 2), 2: Fraction(1, 2)},
            mode="exact",
        )
        assert tv_distance(half, half) == 0.0
        assert tv_distance(point_mass(0), point_mass(1)) == pytest.approx(1.0)
        assert tv_distance(half, {0: 1.0}) == pytest.approx(0.5)

    def test_ks_point_mass_vs_normal(self):
        """Point mass at 0 is 0.5 from Phi."""
        assert ks_distance(point_mass(0), law_cdf(StdNormal())) == pytest.approx(0.5)

    def test_ks_rejects_scale(self):
        """Scale must be positive."""
        with pytest.raises(ValueError):
            ks_distance(point_mass(0), std_normal_cdf, 0.0, 0.0)

    def test_weighted_empirical_cdf(self):
        """Step heights follow the weights."""
        sample = xk_weighted_sample(2, 0.5, 10, seed=0)
        cdf = weighted_empirical_cdf(sample)
        assert cdf(sample.values.min() - 1) == 0.0
        assert cdf(sample.values.max()) == pytest.approx(1.0)

    def test_critical_value(self):
        """About 1.63/sqrt(n) at 1%."""
        assert ks_critical_value(10_000) == pytest.approx(0.01628, abs=1e-4)
