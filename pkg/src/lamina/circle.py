"""Exact rational points of the circle and the dynamics of angle multiplication.

Angles are reduced fractions in [0, 1); the map of degree d sends an angle a
to d*a mod 1.  Everything here is exact: no floats anywhere, unbounded
integers throughout.  All values are immutable and every function is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError

Angle = Fraction


def angle(numerator, denominator=1) -> Fraction:
    """Build an angle: the value reduced mod 1 into [0, 1)."""
    return Fraction(numerator, denominator) % 1


@dataclass(frozen=True, slots=True)
class CircleMap:
    """The circle endomorphism a -> degree*a mod 1, degree >= 2."""

    degree: int

    def __post_init__(self):
        if self.degree < 2:
            raise DomainError(f"map degree must be >= 2, got {self.degree}")


@dataclass(frozen=True, slots=True)
class OrbitProfile:
    """Forward orbit of an angle: a preperiodic tail followed by one cycle.

    orbit[preperiod : preperiod + period] is the cycle; applying the map to
    orbit[i] gives orbit[i + 1], wrapping inside the cycle.  preperiod == 0
    iff the angle itself is periodic.
    """

    preperiod: int
    period: int
    orbit: tuple

    @property
    def tail(self):
        return self.orbit[: self.preperiod]

    @property
    def cycle(self):
        return self.orbit[self.preperiod :]


def map_angle(m: CircleMap, a: Angle) -> Angle:
    """Image of the angle: (degree * a) mod 1, exactly reduced."""
    return (m.degree * a) % 1


def orbit_profile(m: CircleMap, a: Angle) -> OrbitProfile:
    """Exact preperiod/period by a hash-on-value first-repeat scan.

    Iterates on numerators over the fixed denominator of ``a``, so the scan
    is pure integer arithmetic; rational angles are always eventually
    periodic under multiplication, so this terminates.
    """
    q = a.denominator
    d = m.degree
    seen = {}
    seq = []
    n = a.numerator
    while n not in seen:
        seen[n] = len(seq)
        seq.append(n)
        n = (n * d) % q
    first = seen[n]
    period = len(seq) - first
    orbit = tuple(Fraction(k, q) for k in seq)
    return OrbitProfile(preperiod=first, period=period, orbit=orbit)


def is_periodic(m: CircleMap, a: Angle) -> bool:
    """True iff the angle is on a cycle: denominator coprime to the degree."""
    return math.gcd(a.denominator, m.degree) == 1


def period_of(m: CircleMap, a: Angle) -> int:
    """Exact period of a periodic angle (DomainError otherwise)."""
    if not is_periodic(m, a):
        raise DomainError(f"{a} is not periodic under degree {m.degree}")
    q = a.denominator
    d = m.degree
    # period of p/q, gcd(p, q) = 1, is the least k with d^k = 1 mod q
    k, power = 1, d % q
    while power != 1 and q > 1:
        power = (power * d) % q
        k += 1
    return k


def preimages(m: CircleMap, a: Angle) -> list:
    """The d preimages (a + k)/d, k = 0..d-1, in increasing circular order."""
    d = m.degree
    return [(a + k) / d for k in range(d)]


def cyclically_ordered(points) -> bool:
    """True iff the list is in non-strict counterclockwise cyclic order.

    Equivalently: some rotation of the list is non-decreasing, which holds
    iff there is at most one strict descent around the cycle.
    """
    pts = list(points)
    if len(pts) < 3:
        raise DomainError("cyclic order needs at least 3 points")
    descents = sum(1 for i in range(len(pts)) if pts[i] > pts[(i + 1) % len(pts)])
    return descents <= 1


def strictly_cyclic(points) -> bool:
    """Strict variant: pairwise distinct and in strictly increasing cyclic order."""
    pts = list(points)
    if len(pts) != len(set(pts)):
        return False
    descents = sum(1 for i in range(len(pts)) if pts[i] > pts[(i + 1) % len(pts)])
    return descents <= 1


def cyclic_between(x: Angle, y: Angle, z: Angle) -> bool:
    """True iff y lies strictly inside the counterclockwise arc from x to z."""
    return Fraction(0) < (y - x) % 1 < (z - x) % 1
