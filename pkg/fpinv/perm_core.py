"""
Ground-truth combinatorics for pattern-avoiding involutions.

Permutations, classical pattern containment, structural enumeration of
involutions, and the brute-force fixed-point weight polynomials that every
faster engine is certified against. Also home of the q-biased law built from
any weight polynomial.
"""

import logging
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import mpmath

from fpinv.fp_types import (
    FpDistribution,
    Pattern,
    Permutation,
    Scalar,
    WeightPolynomial,
    is_exact,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Configuration
# ============================================================================


ENUMERATION_MAX_N = 14  # I(14) = 46206736 involutions
BRUTE_FORCE_MAX_N = 12
FLOAT_DPS = 50  # mpmath working precision for huge-count normalization

NAMED_LENGTH3 = ("321", "132", "213", "231", "312")


# ============================================================================
# Pure Functions - No side effects, deterministic
# ============================================================================


def parse_pattern(tag: str) -> Pattern:
    """Parse "321", "inc4", "inc:4", "dec4" or an explicit one-line pattern."""
    text = tag.strip().lower().replace(":", "").replace("(", "").replace(")", "")
    for prefix, build in (("inc", Pattern.increasing), ("dec", Pattern.decreasing)):
        if text.startswith(prefix):
            digits = text[len(prefix) :]
            if not digits.isdigit() or int(digits) < 1:
                raise ValueError(f"Invalid pattern tag: {tag}")
            return build(int(digits))
    return Pattern.explicit(text)


def _as_values(p: Union[Permutation, Pattern]) -> Tuple[int, ...]:
    return p.permutation.image if isinstance(p, Pattern) else p.image


def _contains_length3(values: Sequence[int], pattern: Sequence[int]) -> bool:
    """Triple loop over index triples, pruning on the first pair."""
    a, b, c = pattern
    ab, bc, ac = a < b, b < c, a < c
    n = len(values)
    for i in range(n - 2):
        vi = values[i]
        for j in range(i + 1, n - 1):
            vj = values[j]
            if (vi < vj) != ab:
                continue
            for k in range(j + 1, n):
                vk = values[k]
                if (vj < vk) == bc and (vi < vk) == ac:
                    return True
    return False


def _contains_general(values: Sequence[int], pattern: Sequence[int]) -> bool:
    """Recursive subsequence matching; a prefix is extended only while it
    stays order-isomorphic to the pattern prefix."""
    m, n = len(pattern), len(values)
    chosen: List[int] = []

    def extend(start: int, depth: int) -> bool:
        if depth == m:
            return True
        target = pattern[depth]
        # leave room for the remaining pattern letters
        for idx in range(start, n - (m - depth) + 1):
            v = values[idx]
            if all(
                (chosen[t] < v) == (pattern[t] < target) for t in range(depth)
            ):
                chosen.append(v)
                if extend(idx + 1, depth + 1):
                    return True
                chosen.pop()
        return False

    return extend(0, 0)


def contains(pi: Permutation, sigma: Union[Permutation, Pattern]) -> bool:
    """True iff some subsequence of pi is order-isomorphic to sigma."""
    values = pi.image
    pattern = _as_values(sigma)
    if not pattern:
        return True
    if len(pattern) > len(values):
        return False
    if len(pattern) == 3:
        return _contains_length3(values, pattern)
    return _contains_general(values, pattern)


def is_involution(pi: Permutation) -> bool:
    """True iff pi(pi(i)) = i for all i."""
    image = pi.image
    return all(image[v - 1] == i for i, v in enumerate(image, 1))


def fixed_points(pi: Permutation) -> int:
    """Number of i with pi(i) = i."""
    return sum(1 for i, v in enumerate(pi.image, 1) if v == i)


def involution_count(n: int) -> int:
    """I(n) from I(n) = I(n-1) + (n-1) I(n-2)."""
    if n < 0:
        raise ValueError(f"n must be nonnegative: {n}")
    prev, cur = 1, 1
    for m in range(2, n + 1):
        prev, cur = cur, cur + (m - 1) * prev
    return cur if n >= 1 else 1


def involution_branches(n: int) -> List[int]:
    """Choices for the image of element n: n itself (fixed) or a partner i < n.

    Each choice spans an independent sub-range of enumerate_involutions.
    """
    if n == 0:
        return []
    return [n] + list(range(1, n))


def enumerate_involutions(
    n: int, branch: Optional[int] = None
) -> Iterator[Permutation]:
    """Yield every involution of [n] exactly once.

    The largest remaining element is either fixed or paired with a smaller
    remaining element. If branch is given, only involutions with
    pi(n) = branch are produced.
    """
    if not 0 <= n <= ENUMERATION_MAX_N:
        raise ValueError(f"n must be in 0..{ENUMERATION_MAX_N}, got {n}")
    if branch is not None and not 1 <= branch <= n:
        raise ValueError(f"branch must be in 1..{n}, got {branch}")

    image = [0] * n

    def build(remaining: Tuple[int, ...]) -> Iterator[Permutation]:
        if not remaining:
            yield Permutation(image=tuple(image))
            return
        top, rest = remaining[-1], remaining[:-1]
        at_root = len(remaining) == n
        if not at_root or branch in (None, top):
            image[top - 1] = top
            yield from build(rest)
        for idx, partner in enumerate(rest):
            if at_root and branch not in (None, partner):
                continue
            image[top - 1] = partner
            image[partner - 1] = top
            yield from build(rest[:idx] + rest[idx + 1 :])

    yield from build(tuple(range(1, n + 1)))


def _resolve_pattern(sigma: Union[str, Pattern, Permutation]) -> Pattern:
    if isinstance(sigma, Pattern):
        return sigma
    if isinstance(sigma, Permutation):
        return Pattern(name=str(sigma), permutation=sigma)
    return parse_pattern(sigma)


def brute_force_weights(
    n: int, sigma: Union[str, Pattern, Permutation]
) -> WeightPolynomial:
    """Weight polynomial of Iv_n(sigma) by exhaustive enumeration."""
    if not 0 <= n <= BRUTE_FORCE_MAX_N:
        raise ValueError(f"n must be in 0..{BRUTE_FORCE_MAX_N}, got {n}")
    pattern = _resolve_pattern(sigma)
    coeffs = [0] * (n + 1)
    for pi in enumerate_involutions(n):
        if not contains(pi, pattern):
            coeffs[fixed_points(pi)] += 1
    logger.debug("brute force n=%d sigma=%s total=%d", n, pattern.name, sum(coeffs))
    return WeightPolynomial(n=n, coeffs=tuple(coeffs))


def avoiding_involutions(
    n: int, sigma: Union[str, Pattern, Permutation]
) -> List[Tuple[Permutation, int]]:
    """The involutions of [n] avoiding sigma, each with its fixed-point count."""
    if not 0 <= n <= BRUTE_FORCE_MAX_N:
        raise ValueError(f"n must be in 0..{BRUTE_FORCE_MAX_N}, got {n}")
    pattern = _resolve_pattern(sigma)
    return [
        (pi, fixed_points(pi))
        for pi in enumerate_involutions(n)
        if not contains(pi, pattern)
    ]


def biased_distribution(w: WeightPolynomial, q: Scalar) -> FpDistribution:
    """Law of fp under P(pi) proportional to q^fp(pi) on the counted set.

    Exact (Fraction) probabilities when q is an int or Fraction; otherwise the
    normalization runs in mpmath extended precision and the probabilities are
    returned as floats, so astronomically large counts do not overflow.
    """
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    support = w.support()
    if not support:
        raise ValueError(f"Weight polynomial for n={w.n} is identically zero")

    probs: Dict[int, Scalar]
    if is_exact(q):
        qf = Fraction(q)
        masses = {j: w.coeffs[j] * qf**j for j in support}
        total = sum(masses.values())
        probs = {j: m / total for j, m in masses.items()}
        return FpDistribution(n=w.n, q=qf, probs=probs, mode="exact")

    # private context: sweeps normalize on several threads at once
    ctx = mpmath.MPContext()
    ctx.dps = FLOAT_DPS
    qm = ctx.mpf(q)
    float_masses = {j: ctx.mpf(w.coeffs[j]) * qm**j for j in support}
    float_total = ctx.fsum(float_masses.values())
    probs = {j: float(m / float_total) for j, m in float_masses.items()}
    return FpDistribution(n=w.n, q=float(q), probs=probs, mode="floating")
