"""
Exact coefficient extraction for the two length-3 generating functions.

Class321 (patterns 321, 132, 213):
    G(z, q) = 2 / (1 - 2qz + sqrt(1 - 4z^2))
            = 1 / (1 - qz - sum_{m>=1} Catalan(m-1) z^{2m})
Class231 (patterns 231, 312):
    G(z, q) = (1 - z^2) / (1 - 2z^2 - qz)

Rows are dense integer polynomials in q. A ballot-walk DP gives the Class321
rows at large n far faster than the convolution and is certified against it.
"""

import logging
import math
from fractions import Fraction
from itertools import islice
from typing import Iterator, List, Literal, Tuple

from fpinv.fp_types import (
    FpDistribution,
    Scalar,
    SeriesTable,
    SigmaClass,
    WeightPolynomial,
    is_exact,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Configuration
# ============================================================================


POLY_ROW_CAP = 60  # Class321 convolution rows
PATH_ROW_CAP = 4000
CLASS231_ROW_CAP = 4000

Phase = Literal["subcritical", "critical", "supercritical"]


# ============================================================================
# Pure Functions - No side effects, deterministic
# ============================================================================


def _check_cap(n_max: int, cap: int, what: str) -> None:
    if not 0 <= n_max <= cap:
        raise ValueError(f"{what}: n must be in 0..{cap}, got {n_max}")


def catalan_numbers(count: int) -> List[int]:
    """Catalan(0..count-1) by C_{m+1} = C_m * 2(2m+1) / (m+2), exactly."""
    values: List[int] = []
    c = 1
    for m in range(count):
        values.append(c)
        c = c * 2 * (2 * m + 1) // (m + 2)
    return values


def sqrt_series_constants(m_max: int) -> List[int]:
    """c_0..c_{m_max} with (1 - sqrt(1 - 4z^2)) / 2 = sum c_m z^{2m}.

    c_0 = 0 and c_m = Catalan(m - 1) for m >= 1.
    """
    return [0] + catalan_numbers(m_max)


def _to_table(sigma_class: SigmaClass, rows: List[List[int]]) -> SeriesTable:
    return SeriesTable(
        sigma_class=sigma_class,
        rows=tuple(
            WeightPolynomial(n=n, coeffs=tuple(row)) for n, row in enumerate(rows)
        ),
    )


def expand_class321(n_max: int) -> SeriesTable:
    """Rows 0..n_max of G(z,q) = 2/(1 - 2qz + sqrt(1 - 4z^2)).

    a_n = q a_{n-1} + sum_{m>=1} c_m a_{n-2m}, with c_m = Catalan(m-1).
    """
    _check_cap(n_max, POLY_ROW_CAP, "expand_class321")
    c = sqrt_series_constants(n_max // 2)
    rows: List[List[int]] = []
    for n in range(n_max + 1):
        coeffs = [0] * (n + 1)
        if n == 0:
            coeffs[0] = 1
        else:
            for j, v in enumerate(rows[n - 1]):
                coeffs[j + 1] += v
            for m in range(1, n // 2 + 1):
                cm = c[m]
                for j, v in enumerate(rows[n - 2 * m]):
                    coeffs[j] += cm * v
        rows.append(coeffs)
    logger.debug("expanded Class321 up to n=%d", n_max)
    return _to_table(SigmaClass.CLASS321, rows)


def _iter_class231_rows() -> Iterator[List[int]]:
    """Rows of (1 - z^2)/(1 - 2z^2 - qz), keeping only two denominator terms.

    c_n = q c_{n-1} + 2 c_{n-2}; row_n = c_n - c_{n-2}.
    """
    older: List[int] = []  # c_{n-2}
    old: List[int] = []  # c_{n-1}
    n = 0
    while True:
        if n == 0:
            cur = [1]
        else:
            cur = [0] * (n + 1)
            for j, v in enumerate(old):
                cur[j + 1] += v
            for j, v in enumerate(older):
                cur[j] += 2 * v
        row = list(cur)
        for j, v in enumerate(older):
            row[j] -= v
        yield row
        older, old = old, cur
        n += 1


def expand_class231(n_max: int) -> SeriesTable:
    """Rows 0..n_max of G(z,q) = (1 - z^2)/(1 - 2z^2 - qz)."""
    _check_cap(n_max, CLASS231_ROW_CAP, "expand_class231")
    return _to_table(
        SigmaClass.CLASS231, list(islice(_iter_class231_rows(), n_max + 1))
    )


def class231_row(n: int) -> WeightPolynomial:
    """Single Class231 row without materialising the table."""
    _check_cap(n, CLASS231_ROW_CAP, "class231_row")
    row = next(islice(_iter_class231_rows(), n, None))
    return WeightPolynomial(n=n, coeffs=tuple(row))


def _iter_path_rows() -> Iterator[List[int]]:
    """b(n, j): +-1 walks of length n from 0 staying >= 0 and ending at j."""
    row = [1]
    while True:
        yield row
        nxt = [0] * (len(row) + 1)
        for j, v in enumerate(row):
            if v:
                nxt[j + 1] += v
                if j:
                    nxt[j - 1] += v
        row = nxt


def path_weights(n_max: int) -> SeriesTable:
    """Ballot-walk table; equal to expand_class321 wherever both are built."""
    _check_cap(n_max, PATH_ROW_CAP, "path_weights")
    return _to_table(SigmaClass.CLASS321, list(islice(_iter_path_rows(), n_max + 1)))


def path_row(n: int) -> WeightPolynomial:
    """Single ballot-walk row with O(n) working state."""
    _check_cap(n, PATH_ROW_CAP, "path_row")
    row = next(islice(_iter_path_rows(), n, None))
    return WeightPolynomial(n=n, coeffs=tuple(row))


def ballot_number(n: int, j: int) -> int:
    """Closed form C(n, m) - C(n, m-1) with m = (n-j)/2; 0 off the lattice."""
    if j < 0 or j > n or (n - j) % 2:
        return 0
    m = (n - j) // 2
    return math.comb(n, m) - (math.comb(n, m - 1) if m >= 1 else 0)


def class_row(sigma_class: SigmaClass, n: int, engine: str = "gf") -> WeightPolynomial:
    """Row n of a class table by the requested engine.

    engine "gf" uses the convolution up to POLY_ROW_CAP for Class321 and the
    rational recurrence for Class231; "path" uses the ballot DP (Class321 only).
    """
    if sigma_class == SigmaClass.CLASS231:
        if engine not in ("gf",):
            raise ValueError(f"Engine {engine} does not support {sigma_class.value}")
        return class231_row(n)
    if engine == "path" or (engine == "gf" and n > POLY_ROW_CAP):
        return path_row(n)
    if engine == "gf":
        return expand_class321(n).row(n)
    raise ValueError(f"Engine {engine} does not support {sigma_class.value}")


def exact_moments(d: FpDistribution) -> Tuple[Scalar, Scalar]:
    """Mean and variance of fp; exact rationals for an exact distribution."""
    if not d.probs:
        raise ValueError("Distribution is empty")
    if d.mode == "exact":
        mean = sum((Fraction(j) * p for j, p in d.probs.items()), Fraction(0))
        second = sum((Fraction(j * j) * p for j, p in d.probs.items()), Fraction(0))
        return mean, second - mean * mean
    mean_f = math.fsum(j * float(p) for j, p in d.probs.items())
    var_f = math.fsum((j - mean_f) ** 2 * float(p) for j, p in d.probs.items())
    return mean_f, var_f


def pgf_eval(w: WeightPolynomial, q: Scalar, u: Scalar) -> Scalar:
    """Finite-n PGF E[u^fp] = [z^n]G(z, uq) / [z^n]G(z, q).

    u = 0 is accepted and returns P(fp = 0).
    """
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if u < 0:
        raise ValueError(f"u must be nonnegative, got {u}")
    if is_exact(q) and is_exact(u):
        q, u = Fraction(q), Fraction(u)
    denominator = w.evaluate(q)
    if denominator == 0:
        raise ValueError(f"Weight polynomial for n={w.n} is identically zero")
    return w.evaluate(u * q) / denominator


def dominant_singularity(q: Scalar) -> Scalar:
    """Dominant singularity of the Class321 G(z, q) in z.

    The square-root points +-1/2 dominate for q <= 1; for q > 1 the pole
    zeta = q/(q^2 + 1) lies strictly inside the disc of radius 1/2.
    """
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if q <= 1:
        return Fraction(1, 2) if is_exact(q) else 0.5
    return q / (q * q + 1)


def phase(q: Scalar) -> Phase:
    """Regime of the Class321 fixed-point law."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if q < 1:
        return "subcritical"
    if q == 1:
        return "critical"
    return "supercritical"
