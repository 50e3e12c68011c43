"""Modular arithmetic over Z/N and progression-support generation."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, factorial, gcd

# (k-1)! has to stay far from 64-bit overflow in downstream counting loops.
MAX_PROGRESSION_LENGTH = 20


def as_density(value) -> Fraction:
    """Coerce a density threshold to an exact rational.

    Floats go through their shortest decimal repr first, so 0.4 means 2/5
    rather than its binary approximation.  That keeps ceil(epsilon * N)
    exact; with raw binary floats, 0.4 * 5 rounds up to 3 instead of 2.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


@dataclass(frozen=True)
class Group:
    """The cyclic group Z/N with canonical residues 0..N-1."""

    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("group modulus must be a positive integer")

    def reduce(self, x: int) -> int:
        return x % self.modulus

    def elements(self) -> range:
        return range(self.modulus)


@dataclass(frozen=True)
class ApParams:
    """Progression length and density threshold for one experiment.

    ``k`` is the number of points in the progressions being counted.  k = 2
    (avoiding single differences) is allowed for threshold-growth runs; the
    matrix embedding machinery additionally needs odd k >= 3, which is
    enforced where the half-length ``r`` is consumed.
    """

    k: int
    epsilon: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_density(self.epsilon))
        if not 2 <= self.k <= MAX_PROGRESSION_LENGTH:
            raise ValueError(f"k must lie in [2, {MAX_PROGRESSION_LENGTH}]")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")

    @property
    def t(self) -> int:
        """Number of nonzero steps in a k-point progression."""
        return self.k - 1

    @property
    def r(self) -> int:
        """Half-length (k-1)/2, defined for odd k only."""
        if self.k % 2 == 0:
            raise ValueError("half-length r requires odd k")
        return (self.k - 1) // 2


def check_coprime(group: Group, params: ApParams) -> bool:
    """True when N shares no factor with (k-1)!.

    Under this condition the k points x, x+d, ..., x+(k-1)d are pairwise
    distinct for every nonzero d, so progression counts are not inflated by
    wrap-around collisions.
    """
    return gcd(group.modulus, factorial(params.k - 1)) == 1


def density_target(group: Group, params: ApParams) -> int:
    """Smallest admissible set size, ceil(epsilon * N), computed exactly."""
    return ceil(params.epsilon * group.modulus)


def progression_support(group: Group, x: int, d: int, k: int) -> list[int]:
    """The k points x, x+d, ..., x+(k-1)d reduced mod N, in step order."""
    if k < 1:
        raise ValueError("progression length must be at least 1")
    n = group.modulus
    return [(x + step * d) % n for step in range(k)]


def pair_support(group: Group, x: int, d_i: int, d_j: int, r: int) -> set[int]:
    """Union of the two forward windows {x + l*d : l in 1..2r} for d_i, d_j."""
    if r < 1:
        raise ValueError("window half-length r must be at least 1")
    n = group.modulus
    pts = {(x + step * d_i) % n for step in range(1, 2 * r + 1)}
    pts |= {(x + step * d_j) % n for step in range(1, 2 * r + 1)}
    return pts


def single_support(group: Group, x: int, d: int, r: int) -> list[int]:
    """The forward window x + d, x + 2d, ..., x + 2r*d mod N, in step order."""
    if r < 1:
        raise ValueError("window half-length r must be at least 1")
    n = group.modulus
    return [(x + step * d) % n for step in range(1, 2 * r + 1)]
