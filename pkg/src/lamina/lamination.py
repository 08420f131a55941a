"""Finite-depth geolaminations: validation, siblings, properness, cleaning.

A GeoLamination holds a finite set of pairwise-unlinked chords (degenerate
ones allowed) that is closed under the forward map up to the represented
pullback depth.  The true objects are infinite; a value here is the depth-n
truncation, so every report is implicitly "to depth n".

Storage is exact integer arithmetic: every endpoint is a numerator over one
common modulus, normalized so the modulus is minimal.  Chord/Fraction views
are materialized on demand; desk-scale builds reach a few hundred thousand
leaves and never touch a float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .circle import CircleMap, map_angle, strictly_cyclic
from .chords import Chord, chord, chord_image, is_critical, is_linked
from .errors import DomainError, NotFoundError


@dataclass(frozen=True, slots=True)
class GeoLamination:
    """Finite set of pairwise-unlinked chords, forward-closed to depth.

    `pairs` are the leaves as (a, b) integer numerators over `modulus`,
    sorted, a <= b; equal entries are degenerate leaves (marked points).
    """

    degree: int
    modulus: int
    pairs: tuple
    depth: int = 0
    provenance: tuple = ()  # free-form build record, (key, value) pairs

    def __post_init__(self):
        if self.degree < 2:
            raise DomainError(f"lamination degree must be >= 2, got {self.degree}")
        g = self.modulus
        for a, b in self.pairs:
            g = math.gcd(g, a, b)
            if g == 1:
                break
        if g > 1:
            object.__setattr__(self, "modulus", self.modulus // g)
            object.__setattr__(
                self, "pairs", tuple(sorted((a // g, b // g) for a, b in self.pairs))
            )

    # -- views ---------------------------------------------------------------

    @property
    def map(self) -> CircleMap:
        return CircleMap(self.degree)

    @property
    def leaves(self):
        return _leaf_set(self)

    def angle(self, x: int) -> Fraction:
        return Fraction(x, self.modulus)

    def to_chord(self, pair) -> Chord:
        return Chord(Fraction(pair[0], self.modulus), Fraction(pair[1], self.modulus))

    def to_pair(self, c: Chord):
        if self.modulus % c.a.denominator or self.modulus % c.b.denominator:
            return None
        x = c.a.numerator * (self.modulus // c.a.denominator)
        y = c.b.numerator * (self.modulus // c.b.denominator)
        return (x, y) if x <= y else (y, x)

    def sorted_leaves(self):
        return [self.to_chord(p) for p in self.pairs]

    def nondegenerate(self):
        return [self.to_chord(p) for p in self.pairs if p[0] != p[1]]

    def endpoints(self):
        pts = set()
        for a, b in self.pairs:
            pts.add(a)
            pts.add(b)
        return {self.angle(x) for x in pts}

    def has_leaf(self, c: Chord) -> bool:
        p = self.to_pair(c)
        return p is not None and p in _pair_set(self)

    def max_denominator(self) -> int:
        out = 1
        for a, b in self.pairs:
            out = max(out, Fraction(a, self.modulus).denominator,
                      Fraction(b, self.modulus).denominator)
        return out

    # -- integer-domain helpers ------------------------------------------------

    def image_point(self, x: int) -> int:
        return (x * self.degree) % self.modulus

    def image_pair(self, p) -> tuple:
        x = (p[0] * self.degree) % self.modulus
        y = (p[1] * self.degree) % self.modulus
        return (x, y) if x <= y else (y, x)

    def is_periodic_point(self, x: int) -> bool:
        den = self.modulus // math.gcd(x, self.modulus)
        return math.gcd(den, self.degree) == 1

    def is_critical_pair(self, p) -> bool:
        return p[0] != p[1] and self.image_point(p[0]) == self.image_point(p[1])

    def pair_set(self):
        return _pair_set(self)

    # -- provenance -------------------------------------------------------------

    def provenance_get(self, key, default=None):
        for k, v in self.provenance:
            if k == key:
                return v
        return default

    def with_provenance(self, **extra):
        return GeoLamination(
            self.degree, self.modulus, self.pairs, self.depth,
            self.provenance + tuple(extra.items()),
        )

    def with_pairs(self, pairs, note=None):
        prov = self.provenance + ((("stage", note),) if note else ())
        return GeoLamination(self.degree, self.modulus, tuple(sorted(pairs)), self.depth, prov)


@lru_cache(maxsize=16)
def _pair_set(lam: GeoLamination):
    return frozenset(lam.pairs)


@lru_cache(maxsize=8)
def _leaf_set(lam: GeoLamination):
    return frozenset(lam.to_chord(p) for p in lam.pairs)


def lamination(degree, chords, depth=0, provenance=()) -> GeoLamination:
    """Build a lamination from chord values (the exact integer form is derived)."""
    chs = [c if isinstance(c, Chord) else chord(*c) for c in chords]
    modulus = 1
    for c in chs:
        modulus = math.lcm(modulus, c.a.denominator, c.b.denominator)
    pairs = set()
    for c in chs:
        x = c.a.numerator * (modulus // c.a.denominator)
        y = c.b.numerator * (modulus // c.b.denominator)
        pairs.add((x, y) if x <= y else (y, x))
    return GeoLamination(degree, modulus, tuple(sorted(pairs)), depth, tuple(provenance))


# ---------------------------------------------------------------------------
# validation


def _crossings_scaled(pairs):
    """Crossing pairs among nondegenerate intervals sorted by (a, -b).

    Stack sweep; a family is pairwise unlinked iff laminar, so an empty
    result is a proof.  With crossings present at least one is reported.
    """
    found = []
    stack = []
    for a, b in pairs:
        while stack and stack[-1][1] <= a:
            stack.pop()
        while stack and b > stack[-1][1] and stack[-1][1] > a:
            found.append(((a, b), stack[-1]))
            stack.pop()
        stack.append((a, b))
    return found


def validate(lam: GeoLamination) -> list:
    """Diagnostics: linked leaf pairs and leaves whose image is missing.

    Empty list iff the lamination is pairwise unlinked and forward-closed.
    """
    violations = []
    nondeg = sorted(
        (p for p in lam.pairs if p[0] != p[1]), key=lambda p: (p[0], -p[1])
    )
    for p, q in _crossings_scaled(nondeg):
        violations.append(("linked", lam.to_chord(p), lam.to_chord(q)))
    present = lam.pair_set()
    d, mod = lam.degree, lam.modulus
    for a, b in lam.pairs:
        x, y = (a * d) % mod, (b * d) % mod
        if ((x, y) if x <= y else (y, x)) not in present:
            violations.append(("image-missing", lam.to_chord((a, b)), None))
    return violations


# ---------------------------------------------------------------------------
# sibling collections


def sibling_collections(lam: GeoLamination, leaf: Chord) -> list:
    """All certified collections of d pairwise-disjoint leaves through `leaf`.

    A collection consists of leaves sharing the image of `leaf`; members must
    be pairwise disjoint (no shared endpoints, no crossings).  Each returned
    collection passes the even-crossing parity rule for every member pair, so
    geometrically impossible patterns are never emitted.
    """
    if not lam.has_leaf(leaf):
        raise NotFoundError(f"{leaf} is not a leaf of the lamination")
    m = lam.map
    if is_critical(m, leaf):
        raise DomainError("critical leaves have no disjoint sibling collections")
    p0 = lam.to_pair(leaf)
    image = lam.image_pair(p0)
    group = [
        lam.to_chord(p)
        for p in lam.pairs
        if p[0] != p[1] and lam.image_pair(p) == image
    ]
    out = []
    others = [c for c in group if c != leaf]
    for combo in combinations(others, lam.degree - 1):
        members = (leaf,) + combo
        if _pairwise_disjoint(members) and _parity_certified(members, m, chord_image(m, leaf)):
            out.append(tuple(sorted(members)))
    return out


def _pairwise_disjoint(members) -> bool:
    for c1, c2 in combinations(members, 2):
        if {c1.a, c1.b} & {c2.a, c2.b} or is_linked(c1, c2):
            return False
    return True


def _parity_certified(members, m: CircleMap, image: Chord) -> bool:
    """Even-crossing parity rule for disjoint sibling collections.

    Endpoints are labelled by the image endpoint they map to; for each member
    pair the chord joining same-label endpoints must be crossed by an even
    number of collection members exactly when the four endpoints sit in one
    of the two allowed cyclic orders.
    """
    labelled = []
    for c in members:
        if map_angle(m, c.a) == image.a:
            labelled.append((c.a, c.b))
        else:
            labelled.append((c.b, c.a))
    for (a1, b1), (a2, b2) in combinations(labelled, 2):
        for x1, y1, x2, y2 in ((a1, b1, a2, b2), (b1, a1, b2, a2)):
            connector = chord(x1, x2)
            crossings = sum(1 for c in members if is_linked(c, connector))
            allowed = strictly_cyclic([x1, y1, x2, y2]) or strictly_cyclic([x1, y2, x2, y1])
            if (crossings % 2 == 0) != allowed:
                return False
    return True


# ---------------------------------------------------------------------------
# equivalence classes generated by chord chains


@dataclass(frozen=True, slots=True)
class AngleClassPartition:
    """Partition of a finite angle set into chord-chain components."""

    classes: tuple  # tuple of tuples of angles, each sorted, sorted by head

    def class_of(self, x):
        for cls in self.classes:
            if x in cls:
                return cls
        raise NotFoundError(f"{x} is not in the partition support")

    def as_sets(self):
        return [set(cls) for cls in self.classes]


class UnionFind:
    """Path-compressing union-find over hashable items."""

    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx

    def groups(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


def equivalence_classes(chords, support) -> AngleClassPartition:
    """Union-find closure of the chord relation restricted to `support`."""
    support = set(support)
    for c in chords:
        if c.a not in support or c.b not in support:
            raise DomainError(f"support is missing endpoints of {c}")
    uf = UnionFind(support)
    for c in chords:
        uf.union(c.a, c.b)
    classes = sorted(tuple(sorted(g)) for g in uf.groups())
    return AngleClassPartition(classes=tuple(classes))


def endpoint_partition(lam: GeoLamination) -> AngleClassPartition:
    """Chord-chain classes over all leaf endpoints of the lamination."""
    uf = UnionFind()
    for a, b in lam.pairs:
        uf.add(a)
        uf.add(b)
        uf.union(a, b)
    classes = sorted(tuple(sorted(lam.angle(x) for x in g)) for g in uf.groups())
    return AngleClassPartition(classes=tuple(classes))


# ---------------------------------------------------------------------------
# properness


@dataclass(frozen=True, slots=True)
class PropernessReport:
    """Verdict and witnesses; proper iff all three witness lists are empty."""

    proper: bool
    offending_critical_leaves: tuple
    offending_wedges: tuple
    improper_leaves: tuple
    depth: int

    def __bool__(self):
        return self.proper


def properness_report(lam: GeoLamination) -> PropernessReport:
    """Exact periodicity tests on critical leaves, wedges, and all leaves.

    A critical leaf with a periodic endpoint, a critical wedge (two leaves
    sharing a vertex with equal non-degenerate image) with periodic vertex,
    or any leaf with exactly one periodic endpoint disqualifies.
    """
    bad_critical = []
    improper = []
    by_vertex = {}
    for p in lam.pairs:
        if p[0] == p[1]:
            continue
        pa, pb = lam.is_periodic_point(p[0]), lam.is_periodic_point(p[1])
        if (pa or pb) and lam.is_critical_pair(p):
            bad_critical.append(p)
        if pa != pb:
            improper.append(p)
        if pa:
            by_vertex.setdefault(p[0], []).append(p)
        if pb:
            by_vertex.setdefault(p[1], []).append(p)
    wedges = []
    for v, incident in by_vertex.items():
        if len(incident) < 2:
            continue
        for p, q in combinations(incident, 2):
            img = lam.image_pair(p)
            if img == lam.image_pair(q) and img[0] != img[1]:
                wedges.append((v, p, q))
    return PropernessReport(
        proper=not (bad_critical or wedges or improper),
        offending_critical_leaves=tuple(lam.to_chord(p) for p in sorted(bad_critical)),
        offending_wedges=tuple(
            (lam.angle(v), (lam.to_chord(p), lam.to_chord(q)))
            for v, p, q in sorted(wedges)
        ),
        improper_leaves=tuple(lam.to_chord(p) for p in sorted(improper)),
        depth=lam.depth,
    )


# ---------------------------------------------------------------------------
# proper core (cleaning)


def proper_core(lam: GeoLamination) -> GeoLamination:
    """Largest sub-lamination whose leaves stay clear of improper structure.

    A leaf survives iff nothing on its forward orbit (itself included) is
    improper, and every non-critical orbit member that has at least one full
    disjoint sibling collection at this depth also has one consisting of
    non-improper leaves.  Periodic leaves, degenerate leaves, and critical
    leaves with non-periodic endpoints always survive.  Idempotent.
    """
    improper = set()
    groups = {}
    for p in lam.pairs:
        if p[0] != p[1]:
            if lam.is_periodic_point(p[0]) != lam.is_periodic_point(p[1]):
                improper.add(p)
            groups.setdefault(lam.image_pair(p), []).append(p)

    def disjoint(p, q):
        if {p[0], p[1]} & {q[0], q[1]}:
            return False
        return not ((p[0] < q[0] < p[1] < q[1]) or (q[0] < p[0] < q[1] < p[1]))

    def has_collection(p, members):
        others = [q for q in members if q != p]
        for combo in combinations(others, lam.degree - 1):
            cand = (p,) + combo
            if all(disjoint(x, y) for x, y in combinations(cand, 2)):
                return True
        return False

    local_ok = {}
    for p in lam.pairs:
        if p[0] == p[1]:
            local_ok[p] = True
        elif p in improper:
            local_ok[p] = False
        elif lam.is_critical_pair(p):
            local_ok[p] = True
        else:
            members = groups.get(lam.image_pair(p), [p])
            if not has_collection(p, members):
                local_ok[p] = True  # no full collection at this depth: unconstrained
            else:
                clean = [q for q in members if q not in improper]
                local_ok[p] = has_collection(p, clean)

    orbit_ok = {}

    def resolve(p):
        # AND of local verdicts along the forward orbit, memoized over the
        # functional graph leaf -> image (cycles get the AND of the cycle)
        path, index = [], {}
        cur = p
        while True:
            if cur in orbit_ok:
                tail = orbit_ok[cur]
                break
            if cur in index:
                cyc = path[index[cur] :]
                tail = all(local_ok[q] for q in cyc)
                for q in cyc:
                    orbit_ok[q] = tail
                path = path[: index[cur]]
                break
            if cur not in local_ok:
                tail = True  # orbit left the represented leaf set
                break
            index[cur] = len(path)
            path.append(cur)
            cur = lam.image_pair(cur)
        val = tail
        for q in reversed(path):
            val = local_ok[q] and val
            orbit_ok[q] = val
        return orbit_ok.get(p, val)

    keep = [p for p in lam.pairs if resolve(p)]
    return GeoLamination(
        lam.degree,
        lam.modulus,
        tuple(keep),
        lam.depth,
        lam.provenance + (("stage", "proper-core"),),
    )
