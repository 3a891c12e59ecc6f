"""
Type definitions for fixed-point biased involution statistics.

This module contains the immutable data structures shared by the counting
engines, the limit laws and the verification harness.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np

# Exact values are Fractions (ints are accepted and promoted); anything else is
# treated as a float.
Scalar = Union[Fraction, float]
Parity = Literal["even", "odd"]
Direction = Literal["increasing", "decreasing"]
BoundMode = Literal["maxColumns", "maxRows"]
Mode = Literal["exact", "floating"]


def is_exact(value: object) -> bool:
    """True for ints and Fractions (bools excluded)."""
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def parity_of(n: int) -> Parity:
    """Parity label of an integer."""
    return "even" if n % 2 == 0 else "odd"


# ============================================================================
# Permutations and patterns
# ============================================================================


@dataclass(frozen=True)
class Permutation:
    """Immutable permutation in one-line notation (values 1..n)."""

    image: Tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.image) != list(range(1, len(self.image) + 1)):
            raise ValueError(f"Not a permutation of 1..{len(self.image)}: {self.image}")

    @property
    def n(self) -> int:
        return len(self.image)

    @classmethod
    def from_string(cls, text: str) -> "Permutation":
        """Parse "3412" (single digits) or "10 2 3 ..." (space separated)."""
        text = text.strip()
        if not text or text == "()":
            return cls(image=())
        if " " in text or "," in text:
            parts = text.replace(",", " ").split()
            return cls(image=tuple(int(p) for p in parts))
        return cls(image=tuple(int(ch) for ch in text))

    def __str__(self) -> str:
        if not self.image:
            return "()"
        if self.n <= 9:
            return "".join(str(v) for v in self.image)
        return " ".join(str(v) for v in self.image)


@dataclass(frozen=True)
class Pattern:
    """A named pattern and the permutation it expands to."""

    name: str
    permutation: Permutation

    @classmethod
    def increasing(cls, length: int) -> "Pattern":
        """Inc(length): 12...length."""
        return cls(
            name=f"inc{length}",
            permutation=Permutation(image=tuple(range(1, length + 1))),
        )

    @classmethod
    def decreasing(cls, length: int) -> "Pattern":
        """Dec(length): length...21."""
        return cls(
            name=f"dec{length}",
            permutation=Permutation(image=tuple(range(length, 0, -1))),
        )

    @classmethod
    def explicit(cls, text: str) -> "Pattern":
        perm = Permutation.from_string(text)
        if perm.n == 0:
            raise ValueError("Pattern must be nonempty")
        return cls(name=str(perm), permutation=perm)

    @property
    def length(self) -> int:
        return self.permutation.n


class SigmaClass(str, Enum):
    """The two length-3 pattern classes sharing a generating function."""

    CLASS321 = "c321"  # {321, 132, 213}
    CLASS231 = "c231"  # {231, 312}


# ============================================================================
# Weight polynomials and distributions
# ============================================================================


@dataclass(frozen=True)
class WeightPolynomial:
    """Counts of avoiding involutions of length n by number of fixed points."""

    n: int
    coeffs: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.n + 1:
            raise ValueError(
                f"Expected {self.n + 1} coefficients for n={self.n}, "
                f"got {len(self.coeffs)}"
            )
        for j, c in enumerate(self.coeffs):
            if c < 0:
                raise ValueError(f"Negative coefficient at j={j}: {c}")
            if c and (j - self.n) % 2:
                raise ValueError(f"Coefficient at j={j} violates parity for n={self.n}")

    def __getitem__(self, j: int) -> int:
        return self.coeffs[j] if 0 <= j <= self.n else 0

    def total(self) -> int:
        """Value at q=1, the number of avoiding involutions."""
        return sum(self.coeffs)

    def support(self) -> List[int]:
        return [j for j, c in enumerate(self.coeffs) if c]

    def evaluate(self, q: Scalar) -> Scalar:
        """Evaluate the polynomial at q (exact for rational q)."""
        value: Scalar = Fraction(0) if is_exact(q) else 0.0
        for c in reversed(self.coeffs):
            value = value * q + c
        return value


@dataclass(frozen=True)
class FpDistribution:
    """Law of fp under the q-biased measure on avoiding involutions of [n]."""

    n: int
    q: Scalar
    probs: Mapping[int, Scalar]
    mode: Mode

    @property
    def support(self) -> List[int]:
        return sorted(self.probs)

    def prob(self, j: int) -> Scalar:
        return self.probs.get(j, 0)

    def as_float(self) -> Dict[int, float]:
        return {j: float(p) for j, p in sorted(self.probs.items())}


@dataclass(frozen=True)
class SeriesTable:
    """Rows 0..n_max of a bivariate generating function, as weight polynomials."""

    sigma_class: SigmaClass
    rows: Tuple[WeightPolynomial, ...]

    @property
    def n_max(self) -> int:
        return len(self.rows) - 1

    def row(self, n: int) -> WeightPolynomial:
        return self.rows[n]


@dataclass(frozen=True)
class Shape:
    """Integer partition, parts weakly decreasing and positive."""

    parts: Tuple[int, ...]

    def __post_init__(self) -> None:
        if any(p <= 0 for p in self.parts):
            raise ValueError(f"Parts must be positive: {self.parts}")
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise ValueError(f"Parts must be weakly decreasing: {self.parts}")

    @property
    def n(self) -> int:
        return sum(self.parts)

    def conjugate(self) -> "Shape":
        """Column lengths as a shape."""
        if not self.parts:
            return self
        return Shape(
            parts=tuple(
                sum(1 for p in self.parts if p > c) for c in range(self.parts[0])
            )
        )


# ============================================================================
# Limit laws
# ============================================================================


@dataclass(frozen=True)
class NBParity:
    """Negative Binomial(r=2, p=1-q) conditioned on a parity."""

    q: float
    parity: Parity


@dataclass(frozen=True)
class MonotoneParity:
    """Law proportional to q^i C(k, i) on one parity class of 0..k."""

    k: int
    q: float
    parity: Parity


@dataclass(frozen=True)
class Rayleigh1:
    """Rayleigh law with scale 1."""


@dataclass(frozen=True)
class StdNormal:
    """Standard normal law."""


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Draws of the alternating eigenvalue sum with tilt weights."""

    k: int
    q: float
    values: np.ndarray
    weights: np.ndarray
    seed: int
    ess: float

    @property
    def count(self) -> int:
        return int(self.values.shape[0])

    @property
    def low_ess(self) -> bool:
        return self.ess < self.count / 10


@dataclass(frozen=True, eq=False)
class TiltedAlternatingGOE:
    """Law of X_k, represented by a weighted Monte Carlo sample."""

    k: int
    q: float
    sample: WeightedSample


LimitLaw = Union[NBParity, MonotoneParity, Rayleigh1, StdNormal, TiltedAlternatingGOE]


@dataclass(frozen=True)
class ClassConstants:
    """Centering and scaling constants of the Gaussian regimes."""

    sigma_class: SigmaClass
    q: float
    mean_slope: float
    variance_slope_candidates: Tuple[Tuple[str, float], ...]
    centering: str


# ============================================================================
# Harness reports
# ============================================================================


@dataclass(frozen=True)
class ExperimentSpec:
    """What a harness run computes."""

    theorem: str  # T1 | T2 | T3a | T3b | T3c | T4 | cross | anchor
    q: Scalar
    n_list: Tuple[int, ...]
    engine: str  # bruteforce | gf | path | shape | montecarlo
    sigma: Optional[str] = None
    k: Optional[int] = None
    direction: Optional[Direction] = None
    parity: Optional[Parity] = None
    samples: int = 0
    seed: int = 0


@dataclass(frozen=True)
class ReportRow:
    """One n of a sweep."""

    n: int
    distance: float
    distance_type: str
    mean: float
    variance: float
    extras: Tuple[Tuple[str, float], ...] = ()


@dataclass(frozen=True)
class Check:
    """A named threshold comparison."""

    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ExperimentReport:
    """Everything a harness run produced."""

    spec: ExperimentSpec
    rows: Tuple[ReportRow, ...]
    verdicts: Tuple[Tuple[str, float], ...]
    checks: Tuple[Check, ...]
    warnings: Tuple[str, ...]
    version: str
    wall_clock: float = field(default=0.0, compare=False)
    vacuous: bool = False

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
