"""
Fixed-point weights for monotone patterns from Young diagram counts.

An involution's RSK shape has first row equal to its longest increasing
subsequence and first column equal to its longest decreasing subsequence, and
its number of fixed points equals the number of odd-length columns. Summing
f^lambda over shapes with bounded columns (or rows), grouped by odd columns,
therefore yields the weight polynomials of Inc(k+1) and Dec(k+1). These
correspondences are used as oracles and certified against brute force.
"""

import logging
import math
from functools import lru_cache
from typing import Iterator, List, Tuple

from fpinv import perm_core
from fpinv.fp_types import BoundMode, Direction, Pattern, Shape, WeightPolynomial

logger = logging.getLogger(__name__)


# ============================================================================
# Configuration
# ============================================================================


# (largest k, largest n) partition-count guards, checked in order
SHAPE_GUARDS: Tuple[Tuple[int, int], ...] = ((3, 400), (5, 120))
SHAPE_GENERAL_MAX_N = 40
CERTIFY_MAX_N = 9
CERTIFY_K_VALUES = (1, 2, 3, 4)


# ============================================================================
# Pure Functions - No side effects, deterministic
# ============================================================================


def _partitions(n: int, max_part: int, max_len: int) -> Iterator[Tuple[int, ...]]:
    """Partitions of n with parts <= max_part and at most max_len parts.

    Chooses the multiplicity of the largest allowed part first, most copies
    first, so the output is in decreasing lexicographic order.
    """
    if n == 0:
        yield ()
        return
    if max_part <= 0 or max_len <= 0 or n > max_part * max_len:
        return
    if max_part == 1:
        yield (1,) * n
        return
    for count in range(min(n // max_part, max_len), -1, -1):
        rest = n - count * max_part
        head = (max_part,) * count
        for tail in _partitions(rest, min(max_part - 1, rest), max_len - count):
            yield head + tail


def partitions_bounded(n: int, bound: int, mode: BoundMode) -> Iterator[Shape]:
    """Partitions of n with at most `bound` columns (largest part <= bound)
    or at most `bound` rows, each exactly once, lexicographically decreasing."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if bound < 1:
        raise ValueError(f"bound must be at least 1, got {bound}")
    if mode == "maxColumns":
        parts_iter = _partitions(n, min(bound, n), n)
    elif mode == "maxRows":
        parts_iter = _partitions(n, n, bound)
    else:
        raise ValueError(f"Unknown mode: {mode}")
    for parts in parts_iter:
        yield Shape(parts=parts)


def hook_count(s: Shape) -> int:
    """Number of standard Young tableaux of shape s: n! / prod(hooks)."""
    columns = s.conjugate().parts
    product = 1
    for i, row_len in enumerate(s.parts):
        for j in range(row_len):
            product *= (row_len - j - 1) + (columns[j] - i - 1) + 1
    count, remainder = divmod(math.factorial(s.n), product)
    if remainder:
        raise RuntimeError(f"Hook product does not divide {s.n}! for {s.parts}")
    return count


def odd_columns(s: Shape) -> int:
    """Number of columns of odd length."""
    return sum(1 for length in s.conjugate().parts if length % 2)


def _check_guard(n: int, k: int) -> None:
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    for k_limit, n_limit in SHAPE_GUARDS:
        if k <= k_limit:
            if n > n_limit:
                raise ValueError(f"n={n} exceeds the shape guard {n_limit} for k={k}")
            return
    if n > SHAPE_GENERAL_MAX_N:
        raise ValueError(
            f"n={n} exceeds the shape guard {SHAPE_GENERAL_MAX_N} for k={k}"
        )


def monotone_weights(n: int, k: int, direction: Direction) -> WeightPolynomial:
    """Weight polynomial of involutions avoiding Inc(k+1) or Dec(k+1).

    increasing: shapes with at most k columns (longest increasing <= k);
    decreasing: shapes with at most k rows (longest decreasing <= k).
    In both cases fp is the number of odd columns.
    """
    _check_guard(n, k)
    if direction == "increasing":
        mode: BoundMode = "maxColumns"
    elif direction == "decreasing":
        mode = "maxRows"
    else:
        raise ValueError(f"Unknown direction: {direction}")

    coeffs = [0] * (n + 1)
    shapes = 0
    for shape in partitions_bounded(n, k, mode):
        coeffs[odd_columns(shape)] += hook_count(shape)
        shapes += 1
    logger.debug("monotone n=%d k=%d %s: %d shapes", n, k, direction, shapes)
    return WeightPolynomial(n=n, coeffs=tuple(coeffs))


def monotone_pattern(k: int, direction: Direction) -> Pattern:
    """The pattern Inc(k+1) or Dec(k+1) avoided by monotone_weights(., k, .)."""
    if direction == "increasing":
        return Pattern.increasing(k + 1)
    return Pattern.decreasing(k + 1)


def certification_mismatches(
    n_max: int = CERTIFY_MAX_N, k_values: Tuple[int, ...] = CERTIFY_K_VALUES
) -> List[Tuple[int, int, str, int, int, int]]:
    """(n, k, direction, j, shape value, brute value) for every disagreement
    with brute force; only the first differing j per (n, k, direction)."""
    mismatches: List[Tuple[int, int, str, int, int, int]] = []
    directions: Tuple[Direction, ...] = ("increasing", "decreasing")
    for direction in directions:
        for k in k_values:
            pattern = monotone_pattern(k, direction)
            for n in range(n_max + 1):
                fast = monotone_weights(n, k, direction)
                slow = perm_core.brute_force_weights(n, pattern)
                for j in range(n + 1):
                    if fast[j] != slow[j]:
                        mismatches.append((n, k, direction, j, fast[j], slow[j]))
                        break
    return mismatches


@lru_cache(maxsize=None)
def ensure_certified(n_max: int = CERTIFY_MAX_N) -> None:
    """Raise RuntimeError unless the shape engine matches brute force.

    Cached: runs once per process and bound.
    """
    mismatches = certification_mismatches(n_max)
    if mismatches:
        n, k, direction, j, fast, slow = mismatches[0]
        raise RuntimeError(
            f"Shape engine disagrees with brute force at n={n}, k={k}, "
            f"{direction}, j={j}: {fast} != {slow}"
        )
    logger.info("shape engine certified against brute force for n <= %d", n_max)
