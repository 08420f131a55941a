"""Parameter slice over a fixed critical leaf: portraits, minors, classes.

For a fixed critical leaf with non-periodic endpoints, candidate first
elements are enumerated through their minors: each candidate chord or point
in the image circle lifts uniquely to a generalized critical quadrilateral
with vertices in the closed long side of the fixed leaf.  Admissible
portraits are tagged by their minors; the equivalence relation generated by
the minors is the slice's parameter lamination sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .circle import CircleMap, is_periodic, map_angle, orbit_profile
from .chords import Chord, chord, is_critical, is_linked, min_arc_length
from .classify import critical_taxonomy, _fixed_points_on_closure
from .errors import DomainError, ExcludedCaseError, NotFoundError
from .faces import face_structure, gap_degree
from .lamination import (
    AngleClassPartition,
    GeoLamination,
    UnionFind,
    equivalence_classes,
)
from .portraits import (
    QcPortrait,
    classify_quad,
    is_admissible,
    leaf_quad,
    minor,
    portrait,
    quad,
    realize_portrait,
    triangle_quad,
)

THIRD = Fraction(1, 3)


@dataclass(frozen=True, slots=True)
class SliceSpec:
    """Fixed critical leaf, vertex denominator bound, and pullback depth."""

    d_chord: Chord
    max_denominator: int
    depth: int

    def __post_init__(self):
        m = CircleMap(3)
        if not is_critical(m, self.d_chord):
            raise DomainError(f"{self.d_chord} is not a cubic critical chord")
        for e in self.d_chord.endpoints:
            if orbit_profile(m, e).preperiod < 1:
                raise DomainError(f"endpoint {e} of the fixed leaf is periodic")
        if self.max_denominator < 1 or self.depth < 1:
            raise DomainError("max denominator and depth must be positive")

    @property
    def oriented(self):
        """Endpoints (a, b) with the counterclockwise arc a -> b of length 1/3."""
        a, b = self.d_chord.endpoints
        if (b - a) % 1 == THIRD:
            return a, b
        return b, a

    @property
    def third_preimage(self):
        """The preimage of the image point besides the fixed leaf's endpoints."""
        a, b = self.oriented
        d_img = map_angle(CircleMap(3), a)
        return next(
            x for x in ((d_img + j) / 3 for j in range(3)) if x not in (a, b)
        )


@dataclass(frozen=True, slots=True)
class SliceResult:
    spec: SliceSpec
    portraits: tuple
    minors: tuple
    classes: AngleClassPartition
    flags: tuple  # per-portrait notes, parallel to `portraits`


@dataclass(frozen=True, slots=True)
class MinorSet:
    source_case: str  # 'finite-critical-set' | 'fatou-major' | 'unique-critical-class'
    set: tuple  # convex hull vertex list of the critical class
    image: tuple  # hull vertex list of its image (1..3 points)

    @property
    def image_chord(self):
        if len(self.image) == 1:
            return chord(self.image[0])
        if len(self.image) == 2:
            return chord(self.image[0], self.image[1])
        return None


def _angles_up_to(max_den):
    out = []
    for q in range(1, max_den + 1):
        for p in range(q):
            if math.gcd(p, q) == 1:
                out.append(Fraction(p, q))
    return sorted(out)


def _complement_lifts(spec: SliceSpec, theta: Fraction):
    """The preimages of an image angle inside the closed long side."""
    a, b = spec.oriented
    span = Fraction(2, 3)
    out = []
    for j in range(3):
        x = (theta + j) / 3
        if (x - b) % 1 <= span:
            out.append(x)
    return sorted(out)


def enumerate_slice(spec: SliceSpec) -> SliceResult:
    """Candidate portraits via their minors, filtered by exact admissibility.

    Candidate minors are points and chords with endpoints of bounded
    denominator; each lifts to the critical leaf or collapsing quadrilateral
    with vertices in the closed long side of the fixed leaf.  The triangle
    over the fixed leaf is always included.  Output order is canonical.
    """
    m = CircleMap(3)
    a, b = spec.oriented
    v = spec.third_preimage
    d_leaf = spec.d_chord
    dq = leaf_quad(d_leaf)

    candidates = []
    seen = set()

    def consider(q, exempt=False):
        if q in seen:
            return
        seen.add(q)
        if not exempt and max(x.denominator for x in q.vertex_set) > spec.max_denominator:
            return
        if q == dq:
            return
        p = QcPortrait(q, dq)
        try:
            if is_admissible(p):
                candidates.append(p)
        except DomainError:
            pass

    # the triangle over the fixed leaf is admissible at any denominator bound
    consider(triangle_quad([a, b, v]), exempt=True)

    angles = _angles_up_to(spec.max_denominator)
    # point minors lift to critical leaves on the long side
    for theta in angles:
        lifts = _complement_lifts(spec, theta)
        for i in range(len(lifts)):
            for j in range(i + 1, len(lifts)):
                x, y = lifts[i], lifts[j]
                if (y - x) % 1 == THIRD or (x - y) % 1 == THIRD:
                    try:
                        consider(leaf_quad(chord(x, y)))
                    except DomainError:
                        pass
    # chord minors lift to collapsing quadrilaterals
    for i, t1 in enumerate(angles):
        l1 = _complement_lifts(spec, t1)
        if len(l1) < 2:
            continue
        for t2 in angles[i + 1 :]:
            l2 = _complement_lifts(spec, t2)
            if len(l2) < 2:
                continue
            for x in l1:
                for y in l2:
                    verts = sorted({x, (x + THIRD) % 1, y, (y + THIRD) % 1})
                    if len(verts) != 4:
                        continue
                    try:
                        q = quad(*verts)
                    except DomainError:
                        continue
                    if classify_quad(q) == "collapsing-quadrilateral":
                        consider(q)

    candidates.sort(key=lambda p: (minor(p), p.first.vertices))
    minors = tuple(minor(p) for p in candidates)
    support = {e for c in minors for e in c.endpoints}
    classes = equivalence_classes(list(minors), support)
    return SliceResult(
        spec=spec,
        portraits=tuple(candidates),
        minors=minors,
        classes=classes,
        flags=tuple(None for _ in candidates),
    )


# ---------------------------------------------------------------------------
# minor sets of realized laminations


def minor_set_of(lam: GeoLamination, d_leaf: Chord) -> MinorSet:
    """The image of the lamination's distinguished critical class.

    Unique critical class: the chord-chain class of the fixed leaf.  Finite
    second critical set: its hull.  Degree-two gap: the hull of the
    return-fixed points on the gap closure (the class of the refixed edge
    with any identity-return or pinch structure absorbed).
    """
    tax = critical_taxonomy(lam, d_leaf)
    if tax.siegel_flagged:
        raise ExcludedCaseError("minor sets are not defined for capture-type laminations")
    m = lam.map
    if tax.case == "1":
        cls = tuple(tax.witness_class)
        image = tuple(sorted({map_angle(m, x) for x in cls}))
        return MinorSet(source_case="unique-critical-class", set=cls, image=image)
    if tax.case == "2a" and tax.witness_class:
        cls = tuple(tax.witness_class)
        image = tuple(sorted({map_angle(m, x) for x in cls}))
        return MinorSet(source_case="finite-critical-set", set=cls, image=image)
    gap = tax.witness_gap
    klass = tax.gap_class
    fs = face_structure(lam)
    fi = fs.find_face(gap)
    if tax.case == "2a":
        cls = tuple(sorted({lam.angle(x) for x in fs.vertex_tuple(fi)}))
        image = tuple(sorted({map_angle(m, x) for x in cls}))
        return MinorSet(source_case="finite-critical-set", set=cls, image=image)
    k = klass.period if klass.period else 1
    fixed = tuple(_fixed_points_on_closure(lam, fs, fi, k))
    image = tuple(sorted({map_angle(m, x) for x in fixed}))
    return MinorSet(source_case="fatou-major", set=fixed, image=image)


# ---------------------------------------------------------------------------
# portrait comparison


def chords_meet(c1: Chord, c2: Chord) -> bool:
    """Whether two chords intersect as subsets of the closed disk."""
    if c1 == c2:
        return True
    if set(c1.endpoints) & set(c2.endpoints):
        return True
    if c1.degenerate or c2.degenerate:
        return False
    return is_linked(c1, c2)


def compare_portraits(p1: QcPortrait, p2: QcPortrait, depth: int) -> dict:
    """Realize both portraits and compare their class partitions.

    The comparison support is the set of leaf endpoints represented in both
    laminations; two portraits with meeting minors must induce the same
    partition there.
    """
    lam1 = realize_portrait(p1, depth)
    lam2 = realize_portrait(p2, depth)
    meet = chords_meet(minor(p1), minor(p2))

    def endpoint_roots(lam):
        uf = UnionFind()
        for a, b in lam.pairs:
            uf.add(a)
            uf.add(b)
            uf.union(a, b)
        return uf

    uf1, uf2 = endpoint_roots(lam1), endpoint_roots(lam2)
    pts1 = {lam1.angle(x) for x in uf1.parent}
    pts2 = {lam2.angle(x) for x in uf2.parent}
    support = sorted(pts1 & pts2)

    def partition_on(uf, lam):
        groups = {}
        for x in support:
            sc = x.numerator * (lam.modulus // x.denominator)
            groups.setdefault(uf.find(sc), []).append(x)
        return sorted(tuple(g) for g in groups.values())

    part1 = partition_on(uf1, lam1)
    part2 = partition_on(uf2, lam2)
    witness = None
    if part1 != part2:
        s1, s2 = set(part1), set(part2)
        witness = sorted(s1 ^ s2)[0]
    return {
        "minors_meet": meet,
        "classes_equal": part1 == part2,
        "witness": witness,
        "support_size": len(support),
    }


# ---------------------------------------------------------------------------
# slice-level checks


def hulls_unlinked(cls1, cls2) -> bool:
    """Disjoint convex hulls of two circle point classes."""
    s1, s2 = sorted(set(cls1)), sorted(set(cls2))
    if set(s1) & set(s2):
        return False
    if len(s1) == 1 and len(s2) == 1:
        return True
    for i, x in enumerate(s1):
        nxt = s1[(i + 1) % len(s1)]
        span = (nxt - x) % 1
        if all(0 < (t - x) % 1 < span for t in s2):
            return True
    return len(s1) < 2


def slice_lamination_axioms(result: SliceResult, realize_depth=None) -> dict:
    """Desk-scale checks of the parameter-lamination axioms on a slice sample.

    Classes must be finite with pairwise unlinked hulls; doubling the
    denominator bound only adds minors and merges classes; and each class
    hull must equal the minor set of a realized lamination from the class.
    """
    report = {"e2_violations": [], "e3_violations": [], "monotone": None,
              "class_minor_matches": [], "class_minor_mismatches": []}
    classes = result.classes.classes
    for i, c1 in enumerate(classes):
        if len(c1) > 100:
            report["e3_violations"].append(c1)
        for c2 in classes[i + 1 :]:
            if not hulls_unlinked(c1, c2):
                report["e2_violations"].append((c1, c2))

    bigger = enumerate_slice(
        SliceSpec(result.spec.d_chord, 2 * result.spec.max_denominator, result.spec.depth)
    )
    minors_ok = set(result.minors) <= set(bigger.minors)
    merges_ok = all(
        any(set(old) <= set(new) for new in bigger.classes.classes)
        for old in classes
    )
    report["monotone"] = bool(minors_ok and merges_ok)

    depth = realize_depth or result.spec.depth
    by_class = {}
    for p, mn in zip(result.portraits, result.minors):
        cls = result.classes.class_of(mn.a)
        by_class.setdefault(cls, p)
    for cls, p in sorted(by_class.items()):
        lam = realize_portrait(p, depth)
        ms = minor_set_of(lam, result.spec.d_chord)
        if set(ms.image) == set(cls):
            report["class_minor_matches"].append(cls)
        else:
            report["class_minor_mismatches"].append((cls, ms.image))
    return report
