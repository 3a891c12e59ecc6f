"""
Limiting laws of the fixed-point count and the distances used against them.

Discrete limits (parity-conditioned Negative Binomial, the monotone-pattern
binomial shape), the Rayleigh and normal cdfs, the traceless GOE sampler that
represents the tilted alternating-eigenvalue law, and TV/KS distances.
"""

import logging
import math
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
from scipy import integrate, special, stats

from fpinv.fp_types import (
    ClassConstants,
    FpDistribution,
    LimitLaw,
    MonotoneParity,
    NBParity,
    Parity,
    Rayleigh1,
    SigmaClass,
    StdNormal,
    TiltedAlternatingGOE,
    WeightedSample,
)

logger = logging.getLogger(__name__)

Cdf = Callable[[Union[float, np.ndarray]], Union[float, np.ndarray]]


# ============================================================================
# Configuration
# ============================================================================


SAMPLER_CHUNK = 100_000  # matrices per batched eigendecomposition
NB_TRUNCATION = 400  # NB pmf support kept when a finite table is needed


def _check_parity(parity: str) -> None:
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity}")


# ============================================================================
# Discrete limits
# ============================================================================


def nb_parity_mass(q: float, parity: Parity) -> float:
    """P(N has the given parity) for N ~ NegBin(r=2, p=1-q)."""
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    _check_parity(parity)
    scale = (1 - q) ** 2 / (1 - q * q) ** 2
    return scale * (1 + q * q) if parity == "even" else scale * 2 * q


def nb_parity_pmf(q: float, parity: Parity, i: int) -> float:
    """pmf of NegBin(r=2, p=1-q), P(N=i) = (i+1)(1-q)^2 q^i, on one parity."""
    mass = nb_parity_mass(q, parity)
    if i < 0 or (i % 2 == 0) != (parity == "even"):
        return 0.0
    return (i + 1) * (1 - q) ** 2 * q**i / mass


def limit_pgf_nb(q: float, parity: Parity, u: float) -> float:
    """Closed-form limit PGF of the parity-split fixed-point law for q < 1:
    [1/(1-uq)^2 +- 1/(1+uq)^2] / [1/(1-q)^2 +- 1/(1+q)^2]."""
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    _check_parity(parity)
    sign = 1.0 if parity == "even" else -1.0
    top = 1 / (1 - u * q) ** 2 + sign / (1 + u * q) ** 2
    bottom = 1 / (1 - q) ** 2 + sign / (1 + q) ** 2
    return top / bottom


def parity_normalizer(k: int, q: float, parity: Parity) -> float:
    """sum of q^i C(k, i) over i of the given parity: ((1+q)^k +- (1-q)^k)/2."""
    _check_parity(parity)
    sign = 1 if parity == "even" else -1
    return ((1 + q) ** k + sign * (1 - q) ** k) / 2


def published_normalizer(k: int, q: float) -> float:
    """The published normalizer 2^(k-2) ((q+1)^k + (q-1)^k), kept for
    comparison only."""
    return 2.0 ** (k - 2) * ((q + 1) ** k + (q - 1) ** k)


def monotone_parity_pmf(k: int, q: float, parity: Parity, i: int) -> float:
    """pmf proportional to q^i C(k, i) on the parity class, normalized by the
    finite sum over that class."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    _check_parity(parity)
    if not 0 <= i <= k:
        raise ValueError(f"i must be in 0..{k}, got {i}")
    if (i % 2 == 0) != (parity == "even"):
        return 0.0
    return q**i * math.comb(k, i) / parity_normalizer(k, q, parity)


def monotone_parity_table(k: int, q: float, parity: Parity) -> Dict[int, float]:
    return {
        i: p
        for i in range(k + 1)
        if (p := monotone_parity_pmf(k, q, parity, i)) > 0
    }


def nb_parity_table(
    q: float, parity: Parity, upto: int = NB_TRUNCATION
) -> Dict[int, float]:
    return {
        i: nb_parity_pmf(q, parity, i)
        for i in range(upto + 1)
        if (i % 2 == 0) == (parity == "even")
    }


# ============================================================================
# Continuous limits
# ============================================================================


def rayleigh_cdf(x):
    """Rayleigh(1) cdf: 0 for x <= 0, else 1 - exp(-x^2/2)."""
    arr = np.asarray(x, dtype=float)
    out = np.where(arr > 0, -np.expm1(-0.5 * np.square(np.maximum(arr, 0))), 0.0)
    return float(out) if out.ndim == 0 else out


def sqrt2_rayleigh_cdf(x):
    """cdf of sqrt(2) * Rayleigh(1), the law of S_2 at q = 1."""
    return rayleigh_cdf(np.asarray(x, dtype=float) / math.sqrt(2))


def std_normal_cdf(x):
    """Standard normal cdf through erf."""
    arr = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(-arr / math.sqrt(2))
    return float(out) if np.ndim(out) == 0 else out


def _tilt_rate(q: float) -> float:
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    return -math.log(q)


def tilted_rayleigh2_cdf(q: float) -> Cdf:
    """cdf of the k=2 tilted law, density prop. to q^s (s/2) exp(-s^2/4), s >= 0.

    With b = -log q and A = s/2 + b the unnormalized integral is
    1 - e^{-s^2/4 - b s} - b sqrt(pi) (erfcx(b) - e^{-s^2/4 - b s} erfcx(A)).
    """
    b = _tilt_rate(q)
    root_pi = math.sqrt(math.pi)
    total = 1.0 - b * root_pi * special.erfcx(b)

    def cdf(x):
        arr = np.maximum(np.asarray(x, dtype=float), 0.0)
        damp = np.exp(-arr * arr / 4 - b * arr)
        tail = damp * special.erfcx(arr / 2 + b)
        partial = 1.0 - damp - b * root_pi * (special.erfcx(b) - tail)
        out = partial / total
        return float(out) if np.ndim(out) == 0 else out

    return cdf


def tilted_rayleigh2_cdf_quad(q: float, x: float) -> float:
    """The same cdf by one-dimensional quadrature of the density."""
    b = _tilt_rate(q)

    def density(s: float) -> float:
        return math.exp(-b * s) * (s / 2) * math.exp(-s * s / 4)

    if x <= 0:
        return 0.0
    total, _ = integrate.quad(density, 0, np.inf)
    partial, _ = integrate.quad(density, 0, x)
    return partial / total


# ============================================================================
# Gaussian regime constants
# ============================================================================


def _rho(ctx: mpmath.MPContext, sigma_class: SigmaClass, q: float) -> Callable:
    if sigma_class == SigmaClass.CLASS321:
        return lambda u: u * q / (u * u * q * q + 1)
    return lambda u: (-q * u + ctx.sqrt(q * q * u * u + 8)) / 4


def rederive_slopes(sigma_class: SigmaClass, q: float) -> Tuple[float, float]:
    """(f'(1), f''(1) + f'(1) - f'(1)^2) for f(u) = rho(1)/rho(u), by numeric
    differentiation of the singular point rho(u)."""
    ctx = mpmath.MPContext()
    ctx.dps = 40
    rho = _rho(ctx, sigma_class, q)
    rho1 = rho(ctx.mpf(1))

    def f(u):
        return rho1 / rho(u)

    d1 = ctx.diff(f, 1)
    d2 = ctx.diff(f, 1, 2)
    return float(d1), float(d2 + d1 - d1 * d1)


def class_constants(sigma_class: SigmaClass, q: float) -> ClassConstants:
    """Mean slope and variance-slope candidates of the Gaussian regime."""
    q = float(q)
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if sigma_class == SigmaClass.CLASS321:
        q2 = q * q
        return ClassConstants(
            sigma_class=sigma_class,
            q=q,
            mean_slope=(q2 - 1) / (q2 + 1),
            variance_slope_candidates=(
                ("published", 4 * q2 / (q2 + 1)),
                ("rederived", 4 * q2 / (q2 + 1) ** 2),
            ),
            centering="(fp - mean_slope*n) / sqrt(variance_slope*n)",
        )
    return ClassConstants(
        sigma_class=sigma_class,
        q=q,
        mean_slope=q / math.sqrt(q * q + 8),
        variance_slope_candidates=(("published", 8 * q / (8 + q * q) ** 1.5),),
        centering="(fp - mean_slope*n) / sqrt(variance_slope*n)",
    )


# ============================================================================
# GOE machinery
# ============================================================================


def _traceless_eigenvalues(k: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """(size, k) eigenvalues, descending, of trace-projected GOE matrices.

    (A + A^T)/2 has diagonal variance 1 and off-diagonal variance 1/2.
    """
    a = rng.standard_normal((size, k, k))
    m = (a + np.swapaxes(a, 1, 2)) / 2
    trace = np.trace(m, axis1=1, axis2=2)
    m -= (trace / k)[:, None, None] * np.eye(k)
    return np.linalg.eigvalsh(m)[:, ::-1]


def sample_goe_traceless(k: int, rng: np.random.Generator) -> Tuple[float, ...]:
    """Eigenvalues Lambda_1 >= ... >= Lambda_k of one traceless GOE matrix."""
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    return tuple(float(v) for v in _traceless_eigenvalues(k, 1, rng)[0])


def alternating_sum(eigs: Sequence[float]) -> float:
    """S_k = Lambda_1 - Lambda_2 + Lambda_3 - ... of a descending sequence."""
    if any(a < b for a, b in zip(eigs, eigs[1:])):
        raise ValueError("Eigenvalues must be sorted in descending order")
    return math.fsum(v if j % 2 == 0 else -v for j, v in enumerate(eigs))


def _alternating_signs(k: int) -> np.ndarray:
    return np.where(np.arange(k) % 2 == 0, 1.0, -1.0)


def effective_sample_size(weights: np.ndarray) -> float:
    """(sum w)^2 / sum w^2."""
    total = float(np.sum(weights))
    return total * total / float(np.sum(np.square(weights)))


def xk_weighted_sample(k: int, q: float, count: int, seed: int) -> WeightedSample:
    """count draws of S_k with self-normalized tilt weights q^{S_k}.

    Weights are stored divided by their maximum; the weighted empirical law
    approximates X_k. Deterministic given seed.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    signs = _alternating_signs(k)
    chunks = []
    remaining = count
    while remaining:
        size = min(SAMPLER_CHUNK, remaining)
        chunks.append(_traceless_eigenvalues(k, size, rng) @ signs)
        remaining -= size
        logger.debug("sampled %d/%d traceless GOE matrices", count - remaining, count)
    values = np.concatenate(chunks)
    log_w = values * math.log(q)
    weights = np.exp(log_w - log_w.max())
    ess = effective_sample_size(weights)
    sample = WeightedSample(
        k=k, q=float(q), values=values, weights=weights, seed=seed, ess=ess
    )
    if sample.low_ess:
        logger.warning("low effective sample size %.1f of %d draws", ess, count)
    return sample


def merge_samples(a: WeightedSample, b: WeightedSample) -> WeightedSample:
    """Concatenate two samples of the same (k, q); weights share one scale."""
    if (a.k, a.q) != (b.k, b.q):
        raise ValueError("Cannot merge samples of different (k, q)")
    values = np.concatenate([a.values, b.values])
    log_w = values * math.log(a.q)
    weights = np.exp(log_w - log_w.max())
    return WeightedSample(
        k=a.k,
        q=a.q,
        values=values,
        weights=weights,
        seed=a.seed,
        ess=effective_sample_size(weights),
    )


def weighted_empirical_cdf(sample: WeightedSample) -> Cdf:
    """Right-continuous cdf of the self-normalized weighted sample."""
    order = np.argsort(sample.values, kind="stable")
    xs = sample.values[order]
    cum = np.cumsum(sample.weights[order])
    cum /= cum[-1]

    def cdf(x):
        idx = np.searchsorted(xs, np.asarray(x, dtype=float), side="right")
        out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    return cdf


# ============================================================================
# Limit-law dispatch
# ============================================================================


def law_pmf(law: LimitLaw, i: int) -> float:
    """pmf of a discrete limit law."""
    if isinstance(law, NBParity):
        return nb_parity_pmf(law.q, law.parity, i)
    elif isinstance(law, MonotoneParity):
        if not 0 <= i <= law.k:
            return 0.0
        return monotone_parity_pmf(law.k, law.q, law.parity, i)
    else:
        raise ValueError(f"Law has no pmf: {type(law).__name__}")


def law_table(law: LimitLaw) -> Dict[int, float]:
    """Finite pmf table of a discrete law; NB tables stop at NB_TRUNCATION."""
    if isinstance(law, NBParity):
        return nb_parity_table(law.q, law.parity)
    elif isinstance(law, MonotoneParity):
        return monotone_parity_table(law.k, law.q, law.parity)
    else:
        raise ValueError(f"Law has no pmf: {type(law).__name__}")


def law_cdf(law: LimitLaw) -> Cdf:
    """cdf of any limit law."""
    if isinstance(law, Rayleigh1):
        return rayleigh_cdf
    elif isinstance(law, StdNormal):
        return std_normal_cdf
    elif isinstance(law, TiltedAlternatingGOE):
        return weighted_empirical_cdf(law.sample)
    elif isinstance(law, (NBParity, MonotoneParity)):
        upto = law.k if isinstance(law, MonotoneParity) else NB_TRUNCATION
        cum = np.cumsum([law_pmf(law, i) for i in range(upto + 1)])

        def cdf(x):
            idx = np.floor(np.asarray(x, dtype=float)).astype(int)
            out = np.where(idx < 0, 0.0, cum[np.clip(idx, 0, upto)])
            return float(out) if np.ndim(out) == 0 else out

        return cdf
    else:
        raise ValueError(f"Unknown law type: {type(law)}")


# ============================================================================
# Distances
# ============================================================================


def tv_distance(
    a: FpDistribution, b: Union[FpDistribution, Mapping[int, float]]
) -> float:
    """Half the L1 distance over the union of supports.

    Mass of b outside its listed support (a truncated table) counts fully.
    """
    other = b.as_float() if isinstance(b, FpDistribution) else dict(b)
    mine = a.as_float()
    listed = math.fsum(other.values())
    unlisted = max(0.0, 1.0 - listed) if not isinstance(b, FpDistribution) else 0.0
    diff = math.fsum(
        abs(mine.get(j, 0.0) - other.get(j, 0.0)) for j in set(mine) | set(other)
    )
    return 0.5 * (diff + unlisted)


def ks_distance(
    finite: FpDistribution,
    limit_cdf: Cdf,
    center: float = 0.0,
    scale: float = 1.0,
) -> float:
    """sup over atoms x = (j - center)/scale of the cdf gap, finite cdf taken
    from both sides of each atom."""
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    atoms = finite.support
    probs = np.array([float(finite.prob(j)) for j in atoms])
    xs = (np.array(atoms, dtype=float) - center) / scale
    above = np.cumsum(probs)
    below = above - probs
    g = np.asarray(limit_cdf(xs), dtype=float)
    return float(max(np.max(np.abs(above - g)), np.max(np.abs(below - g))))


def weighted_ks(sample: WeightedSample, cdf: Cdf) -> float:
    """KS statistic between a weighted sample and a continuous cdf."""
    order = np.argsort(sample.values, kind="stable")
    xs = sample.values[order]
    w = sample.weights[order]
    above = np.cumsum(w) / np.sum(w)
    below = above - w / np.sum(w)
    g = np.asarray(cdf(xs), dtype=float)
    return float(max(np.max(np.abs(above - g)), np.max(np.abs(below - g))))


def ks_critical_value(count: float, alpha: float = 0.01) -> float:
    """Asymptotic one-sample KS threshold, about 1.63/sqrt(count) at 1%."""
    return float(stats.kstwobign.ppf(1 - alpha)) / math.sqrt(count)


def goe_limit_law(k: int, q: float, samples: int, seed: int) -> TiltedAlternatingGOE:
    sample = xk_weighted_sample(k, q, samples, seed)
    return TiltedAlternatingGOE(k=k, q=q, sample=sample)


def limit_law_for(
    theorem: str,
    q: float,
    parity: Optional[Parity] = None,
    k: Optional[int] = None,
) -> LimitLaw:
    """The limit law a theorem branch predicts (GOE laws excluded)."""
    if theorem == "T1" and k is not None and parity is not None:
        return MonotoneParity(k=k, q=q, parity=parity)
    if theorem == "T3a" and parity is not None:
        return NBParity(q=q, parity=parity)
    if theorem == "T3b":
        return Rayleigh1()
    if theorem in ("T3c", "T4"):
        return StdNormal()
    raise ValueError(f"No closed-form limit law for {theorem}")
