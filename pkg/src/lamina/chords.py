"""Chords of the closed disk: linkage, criticality, lengths, central strips.

A chord is an unordered pair of circle angles; equal endpoints make a
degenerate chord (a marked point).  Two chords are linked when they cross
inside the open disk, i.e. their endpoints strictly interleave on the circle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .circle import Angle, CircleMap, map_angle
from .errors import DomainError

THIRD = Fraction(1, 3)


@dataclass(frozen=True, slots=True)
class Chord:
    """Unordered pair of angles, stored with a <= b.  a == b is a point."""

    a: Angle
    b: Angle

    def __post_init__(self):
        if not (0 <= self.a < 1 and 0 <= self.b < 1):
            raise DomainError(f"chord endpoints must lie in [0,1): {self.a}, {self.b}")
        if self.a > self.b:
            object.__setattr__(self, "a", self.b)
            object.__setattr__(self, "b", self.a)

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    @property
    def endpoints(self):
        return (self.a, self.b)

    def __iter__(self):
        return iter((self.a, self.b))

    def __lt__(self, other):
        return (self.a, self.b) < (other.a, other.b)


def chord(x, y=None) -> Chord:
    """Chord from two angle-like values; one argument makes a point."""
    xa = Fraction(x) % 1
    ya = xa if y is None else Fraction(y) % 1
    return Chord(min(xa, ya), max(xa, ya))


def point(x) -> Chord:
    return chord(x)


def chord_image(m: CircleMap, c: Chord) -> Chord:
    """Chord with both endpoints mapped; may be degenerate (critical collapse)."""
    return chord(map_angle(m, c.a), map_angle(m, c.b))


def is_linked(c1: Chord, c2: Chord) -> bool:
    """True iff the chords cross inside the open disk.

    Strict interleaving of endpoints; shared endpoints and degenerate chords
    never link.
    """
    if c1.degenerate or c2.degenerate:
        return False
    if {c1.a, c1.b} & {c2.a, c2.b}:
        return False
    inside = (c1.a < c2.a < c1.b) + (c1.a < c2.b < c1.b)
    return inside == 1


def is_critical(m: CircleMap, c: Chord) -> bool:
    """Non-degenerate and collapsed to a point by the map."""
    return not c.degenerate and map_angle(m, c.a) == map_angle(m, c.b)


def min_arc_length(c: Chord) -> Fraction:
    """Length of the smaller of the two complementary circle arcs."""
    span = c.b - c.a
    return min(span, 1 - span)


def arc_contains(arc, x: Angle, closed: bool = True) -> bool:
    """Membership of x in the counterclockwise arc (start, end).

    Arcs are traversed counterclockwise from start to end and are closed by
    default.  A zero-length arc contains only its endpoint.
    """
    start, end = arc
    offset = (x - start) % 1
    span = (end - start) % 1
    if closed:
        return offset <= span
    return 0 < offset < span


def arc_length(arc) -> Fraction:
    start, end = arc
    return (end - start) % 1


@dataclass(frozen=True, slots=True)
class CentralStrip:
    """Convex hull of three closed arcs derived from a short cubic chord.

    For a base chord with counterclockwise short side from a to b, the first
    arc runs from b to a + 1/3 and the other two are its rotations by 1/3
    and 2/3.
    """

    base: Chord
    arcs: tuple  # three (start, end) angle pairs, counterclockwise, closed

    def circle_arcs(self):
        return self.arcs

    def contains_angle(self, x: Angle) -> bool:
        """True iff x lies on one of the three boundary circle arcs."""
        return any(arc_contains(arc, x) for arc in self.arcs)

    def arc_index(self, x: Angle):
        for i, arc in enumerate(self.arcs):
            if arc_contains(arc, x):
                return i
        return None


def central_strip(c: Chord) -> CentralStrip:
    """Central strip of a cubic chord with 0 < length < 1/3."""
    span = min_arc_length(c)
    if not (0 < span < THIRD):
        raise DomainError(f"central strip needs 0 < length < 1/3, got {span}")
    # orient so the counterclockwise arc from a to b is the short one
    if c.b - c.a == span:
        a, b = c.a, c.b
    else:
        a, b = c.b, c.a
    arcs = tuple(((b + k * THIRD) % 1, (a + THIRD + k * THIRD) % 1) for k in range(3))
    return CentralStrip(base=c, arcs=arcs)


def strip_entry_check(c: Chord, max_iter: int) -> dict:
    """Track the forward orbit of a cubic chord against its own central strip.

    Requires 1/4 <= length < 1/3.  Reports the least j > 0 at which the j-th
    image has an endpoint on the strip's boundary arcs, and whether that
    image has its endpoints on two distinct arcs.  Iteration stops at
    max_iter or when the chord orbit closes, whichever is first.
    """
    span = min_arc_length(c)
    if not (Fraction(1, 4) <= span < THIRD):
        raise DomainError(f"strip entry check needs 1/4 <= length < 1/3, got {span}")
    strip = central_strip(c)
    m = CircleMap(3)
    seen = {c}
    current = c
    j = 0
    while j < max_iter:
        j += 1
        current = chord_image(m, current)
        ia = strip.arc_index(current.a)
        ib = strip.arc_index(current.b)
        if ia is not None or ib is not None:
            distinct = ia is not None and ib is not None and ia != ib
            return {"first_entry_index": j, "endpoints_in_distinct_arcs": distinct}
        if current in seen:
            break
        seen.add(current)
    return {"first_entry_index": None, "endpoints_in_distinct_arcs": False}
