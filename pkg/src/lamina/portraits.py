"""Generalized critical quadrilaterals and quadratically critical portraits.

A generalized critical quadrilateral is a circularly ordered 4-tuple of
angles (repeats allowed) whose two diagonals are non-degenerate critical
chords (the spikes).  A portrait pairs such a quadrilateral with a fixed
critical leaf; admissibility, privilege, realization by pullback, and the
exceptional-shape resolution all live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .circle import (
    CircleMap,
    cyclically_ordered,
    is_periodic,
    map_angle,
    orbit_profile,
    period_of,
)
from .chords import Chord, chord, chord_image, is_critical, is_linked
from .classify import classify_gap, critical_taxonomy, lift_gap, psi_collapse
from .errors import (
    DomainError,
    ExcludedCaseError,
    IntegrityError,
    NotFoundError,
    PartialMapError,
)
from .faces import face_structure, gap_degree
from .lamination import GeoLamination, proper_core
from .pullback import (
    PullbackPolicy,
    chord_is_periodic,
    forward_closure,
    insert_cycle,
    policy_for_cuts,
    pullback_build,
)


@dataclass(frozen=True, slots=True)
class CriticalQuad:
    """Circularly ordered 4-tuple with critical diagonals, degree 3 unless noted."""

    vertices: tuple
    degree: int = 3

    def __post_init__(self):
        object.__setattr__(self, "vertices", _canonical_rotation(self.vertices))

    @property
    def spikes(self):
        v = self.vertices
        return (chord(v[0], v[2]), chord(v[1], v[3]))

    @property
    def edges(self):
        v = self.vertices
        return tuple(chord(v[i], v[(i + 1) % 4]) for i in range(4))

    @property
    def vertex_set(self):
        return frozenset(self.vertices)

    @property
    def hull(self):
        return tuple(sorted(self.vertex_set))


def _canonical_rotation(vertices):
    vs = tuple(Fraction(v) % 1 for v in vertices)
    if len(vs) != 4:
        raise DomainError("a generalized quadrilateral has exactly 4 marked points")
    rotations = [vs[i:] + vs[:i] for i in range(4)]
    ordered = [r for r in rotations if all(r[i] <= r[i + 1] for i in range(3))]
    if not ordered:
        raise DomainError(f"vertices are not in circular order: {vs}")
    return min(ordered)


def quad(*vertices, degree=3) -> CriticalQuad:
    """Validated generalized critical quadrilateral from 4 marked points."""
    if len(vertices) == 1:
        vertices = tuple(vertices[0])
    q = CriticalQuad(tuple(vertices), degree)
    m = CircleMap(degree)
    for s in q.spikes:
        if s.degenerate or not is_critical(m, s):
            raise DomainError(f"diagonal {s} of {q.vertices} is not a critical chord")
    return q


def leaf_quad(c: Chord, degree=3) -> CriticalQuad:
    """Critical leaf encoded as the degenerate quadrilateral (s, s, t, t)."""
    return quad(c.a, c.a, c.b, c.b, degree=degree)


def triangle_quad(vertices, degree=3, doubled=None) -> CriticalQuad:
    """All-critical triangle with one doubled vertex (smallest by default)."""
    vs = sorted(Fraction(v) % 1 for v in vertices)
    if len(set(vs)) != 3:
        raise DomainError("need three distinct vertices")
    rep = min(vs) if doubled is None else Fraction(doubled) % 1
    if rep not in vs:
        raise DomainError("the doubled vertex must be a triangle vertex")
    four = sorted(vs + [rep])
    return quad(*four, degree=degree)


def classify_quad(q: CriticalQuad) -> str:
    distinct = len(q.vertex_set)
    if distinct == 2:
        return "critical-leaf"
    if distinct == 3:
        return "all-critical-triangle"
    m = CircleMap(q.degree)
    images = {map_angle(m, v) for v in q.vertices}
    if len(images) == 1:
        if q.degree == 3:
            raise IntegrityError("an all-critical quadrilateral cannot occur in degree 3")
        return "all-critical-quadrilateral"
    return "collapsing-quadrilateral"


def strongly_linked(a: CriticalQuad, b: CriticalQuad) -> bool:
    """Some cyclic labelling realizes the non-strict alternation of vertices."""
    av = a.vertices
    for r in range(4):
        bv = b.vertices[r:] + b.vertices[:r]
        merged = [av[0], bv[0], av[1], bv[1], av[2], bv[2], av[3], bv[3]]
        if cyclically_ordered(merged):
            return True
    return False


def share_spike(a: CriticalQuad, b: CriticalQuad) -> bool:
    return bool(set(a.spikes) & set(b.spikes))


@dataclass(frozen=True, slots=True)
class QcPortrait:
    """Ordered pair of distinct generalized critical quadrilaterals.

    The second element is always a critical-leaf quadrilateral here (the
    fixed leaf of the slice).
    """

    first: CriticalQuad
    second: CriticalQuad

    def __post_init__(self):
        if self.first == self.second:
            raise DomainError("the two portrait elements must be distinct")

    @property
    def d_chord(self) -> Chord:
        v = sorted(self.second.vertex_set)
        return chord(v[0], v[1])


def portrait(first, second) -> QcPortrait:
    """Portrait from a quadrilateral (or chord) and the fixed critical leaf."""
    if isinstance(first, Chord):
        first = leaf_quad(first)
    if isinstance(second, Chord):
        second = leaf_quad(second)
    return QcPortrait(first, second)


def minor(p: QcPortrait) -> Chord:
    """The image chord of the portrait's first element (a chord or point)."""
    m = CircleMap(p.first.degree)
    v = p.first.vertices
    return chord(map_angle(m, v[0]), map_angle(m, v[1]))


# ---------------------------------------------------------------------------
# admissibility


def _chord_meets_hull_interior(c: Chord, q: CriticalQuad) -> bool:
    """Whether a chord meets the open hull of the quadrilateral.

    Interior intersection means the chord is a diagonal of the hull or
    crosses one of its edges; meeting only at shared vertices or along a
    shared edge is allowed.
    """
    verts = q.vertex_set
    edge_sets = {frozenset(e.endpoints) for e in q.edges if not e.degenerate}
    if c.degenerate:
        return False
    if c.a in verts and c.b in verts:
        return frozenset(c.endpoints) not in edge_sets
    return any(is_linked(c, e) for e in q.edges)


def _orbit_chords(c: Chord, m: CircleMap):
    out = []
    cur = chord_image(m, c)
    seen = set()
    while cur not in seen:
        seen.add(cur)
        out.append(cur)
        cur = chord_image(m, cur)
    return out


def is_admissible(p: QcPortrait, with_diagnostics=False):
    """Exact admissibility over the finite forward orbits of both elements.

    The elements and all their images may intersect only over a shared edge
    or vertex, and a first element with a periodic vertex needs a degenerate
    image or a periodic edge.  The second element must be a critical leaf
    with non-periodic endpoints (DomainError otherwise).
    """
    m = CircleMap(p.first.degree)
    if classify_quad(p.second) != "critical-leaf":
        raise DomainError("the second portrait element must be a critical leaf")
    d_chord = p.d_chord
    if is_periodic(m, d_chord.a) or is_periodic(m, d_chord.b):
        raise DomainError(f"the fixed leaf {d_chord} must have non-periodic endpoints")

    diagnostics = []
    q = p.first

    # periodic-vertex condition on the first element
    if any(is_periodic(m, v) for v in q.vertices):
        img = minor(p)
        if not img.degenerate and not any(
            not e.degenerate and chord_is_periodic(e, m) or
            (e.degenerate and is_periodic(m, e.a))
            for e in q.edges
        ):
            diagnostics.append(("periodic-vertex-without-periodic-edge", q))

    orbit_elems = [d_chord] + _orbit_chords(d_chord, m) + _orbit_chords(minor(p), m)
    if classify_quad(q) == "critical-leaf":
        hull_chord = chord(*sorted(q.vertex_set))
        orbit_elems.insert(0, hull_chord)
        hull_quad = None
    else:
        hull_quad = q

    if hull_quad is not None:
        for c in orbit_elems:
            if _chord_meets_hull_interior(c, hull_quad):
                diagnostics.append(("image-meets-first-element", c))
    seen_pairs = set()
    for i, c1 in enumerate(orbit_elems):
        for c2 in orbit_elems[i + 1 :]:
            key = (c1, c2)
            if key in seen_pairs or c1 == c2:
                continue
            seen_pairs.add(key)
            if is_linked(c1, c2):
                diagnostics.append(("orbit-chords-linked", c1, c2))

    verdict = not diagnostics
    if with_diagnostics:
        return verdict, diagnostics
    return verdict


# ---------------------------------------------------------------------------
# building blocks for realization


def portrait_policy(p: QcPortrait) -> PullbackPolicy:
    """Cutting chords: the fixed leaf plus one spike of the first element."""
    d_chord = p.d_chord
    spikes = [s for s in p.first.spikes if s != d_chord and not is_linked(s, d_chord)]
    if not spikes:
        raise DomainError("no usable spike disjoint from the fixed leaf")
    return policy_for_cuts(3, [d_chord, min(spikes)])


def portrait_generators(p: QcPortrait):
    """The fixed leaf plus the first element's edges (spikes stay virtual)."""
    gens = {p.d_chord}
    for e in p.first.edges:
        gens.add(e)
    return gens


def build_portrait_lamination(p: QcPortrait, depth: int) -> GeoLamination:
    m = CircleMap(3)
    return pullback_build(portrait_generators(p), m, depth, portrait_policy(p))


# ---------------------------------------------------------------------------
# privileged portraits


def _on_face_closure(lam, fs, fi, x: Fraction) -> bool:
    """Whether an angle lies on a face's circle support (vertex or arc).

    Finite depth matters here: critical-set corners are often pinch limits
    of deeper and deeper leaves and only ever appear on boundary arcs.
    """
    if lam.modulus % x.denominator == 0:
        sc = x.numerator * (lam.modulus // x.denominator)
        if sc in set(fs.vertex_tuple(fi)):
            return True
        mod = lam.modulus
        for u, w in fs.arcs(fi):
            if (sc - u) % mod <= (w - u) % mod:
                return True
        return False
    mod = lam.modulus
    for u, w in fs.arcs(fi):
        if (x - Fraction(u, mod)) % 1 <= Fraction((w - u) % mod, mod):
            return True
    return False


def is_privileged(lam: GeoLamination, p: QcPortrait, with_witness=False):
    """Whether the portrait sits inside a critical set of the lamination.

    True when the first element lies in a finite critical set distinct from
    the fixed leaf, or is the hull of a period-k edge of a fatou(2) gap of
    period k together with a sibling edge sharing its image.  Containment is
    tested against face closures: at finite depth a critical set's corners
    may live on boundary arcs as pinch limits.
    """
    d_chord = p.d_chord
    if not lam.has_leaf(d_chord):
        raise NotFoundError(f"{d_chord} is not a leaf of the lamination")
    q = p.first
    qverts = set(q.vertex_set)

    witness = None

    # critical leaves of the lamination as one-dimensional critical sets
    if len(qverts) == 2:
        for pr in lam.pairs:
            if pr[0] != pr[1] and lam.is_critical_pair(pr):
                cset = {lam.angle(pr[0]), lam.angle(pr[1])}
                if qverts <= cset and lam.to_chord(pr) != d_chord:
                    witness = {"critical_set": "leaf", "leaf": lam.to_chord(pr)}
                    break

    if witness is None:
        fs = face_structure(lam)
        d_pair = lam.to_pair(d_chord)
        for fi in fs.face_indices():
            if not fs.vertex_tuple(fi):
                continue
            if d_pair in fs.edge_pairs(fi):
                pass  # the fixed leaf may bound the hosting gap
            if not all(_on_face_closure(lam, fs, fi, x) for x in qverts):
                continue
            g = fs.to_gap(fi)
            if gap_degree(lam, g) < 2:
                continue
            klass = classify_gap(lam, g)
            if klass.status == "periodic" and klass.kind in ("fatou", "siegel-suspect"):
                if klass.kind != "fatou" or klass.degree != 2:
                    continue
                hit = _fatou_quad_witness(lam, fs, fi, klass, q)
                if hit:
                    witness = {
                        "critical_set": "fatou-gap",
                        "gap": g,
                        "class": klass,
                        "refixed": hit[0],
                        "sibling": hit[1],
                    }
                    break
            else:
                witness = {"critical_set": "finite-gap", "gap": g, "class": klass}
                break

    if with_witness:
        return (witness is not None), witness
    return witness is not None


def _fatou_quad_witness(lam, fs, fi, klass, q):
    """Match q = CH(period-k edge, sibling edge) on a fatou(2) gap closure.

    The first element splits into two opposite edges with equal images; one
    of them must be a (possibly degenerate) structure of vertex period k on
    the gap closure, the other its sibling on the same closure.
    """
    m = lam.map
    k = klass.period
    v = q.vertices
    leaf_pairs = lam.pair_set()

    def edge_ok(e: Chord, need_period: bool) -> bool:
        if not all(_on_face_closure(lam, fs, fi, x) for x in e.endpoints):
            return False
        if need_period:
            if not all(is_periodic(m, x) and period_of(m, x) == k for x in set(e.endpoints)):
                return False
        if not e.degenerate:
            pair = lam.to_pair(e)
            if pair is None or pair not in leaf_pairs:
                return False
        return True

    for ell_v, hat_v in ((((v[0], v[1])), (v[2], v[3])), ((v[1], v[2]), (v[3], v[0]))):
        ell, hat = chord(*ell_v), chord(*hat_v)
        if ell == hat:
            continue
        for cand, sib in ((ell, hat), (hat, ell)):
            if edge_ok(cand, need_period=True) and edge_ok(sib, need_period=False):
                return (cand, sib)
    return None


def privileged_portraits(lam: GeoLamination, d_chord: Chord):
    """Scan the lamination's critical sets for all privileged portraits.

    Candidate first elements: critical leaves, all-critical triangles and
    collapsing quadrilaterals inside finite critical sets, and the
    refixed-plus-sibling hulls of fatou(2) gaps.
    """
    if not lam.has_leaf(d_chord):
        raise NotFoundError(f"{d_chord} is not a leaf of the lamination")
    m = lam.map
    found = set()

    def consider(vertices):
        try:
            qq = quad(*vertices)
        except DomainError:
            return
        if qq == leaf_quad(d_chord):
            return
        try:
            p = portrait(qq, leaf_quad(d_chord))
        except DomainError:
            return
        if is_privileged(lam, p):
            found.add(p)

    for pr in lam.pairs:
        if pr[0] != pr[1] and lam.is_critical_pair(pr):
            c = lam.to_chord(pr)
            consider((c.a, c.a, c.b, c.b))

    fs = face_structure(lam)
    for fi in fs.face_indices():
        verts = fs.vertex_tuple(fi)
        if not verts or len(set(verts)) > 24:
            continue
        g = fs.to_gap(fi)
        if gap_degree(lam, g) < 2:
            continue
        klass = classify_gap(lam, g)
        vs = sorted({lam.angle(v) for v in verts})
        if klass.kind in ("finite", "identity-return", "all-critical") or klass.status in (
            "collapsing",
            "preperiodic",
        ):
            for pair in combinations(vs, 2):
                consider((pair[0], pair[0], pair[1], pair[1]))
            for tri in combinations(vs, 3):
                imgs = {map_angle(m, v) for v in tri}
                if len(imgs) == 1:
                    consider((tri[0], tri[0], tri[1], tri[2]))
            for four in combinations(vs, 4):
                consider(four)
        elif klass.kind == "fatou" and klass.degree == 2:
            candidates = list(klass.refixed_edges) + [chord(v) for v in klass.refixed_vertices]
            boundary = list(g.edges) + [chord(v) for v in g.vertices]
            for ell in candidates:
                img = chord_image(m, ell)
                for hat in boundary:
                    if hat != ell and chord_image(m, hat) == img:
                        hull = sorted(set(ell.endpoints) | set(hat.endpoints))
                        if len(hull) == 4:
                            consider(tuple(hull))
                        elif len(hull) == 3:
                            imgs = {map_angle(m, v) for v in hull}
                            if len(imgs) == 1:
                                consider((hull[0], hull[0], hull[1], hull[2]))
                        elif len(hull) == 2:
                            consider((hull[0], hull[0], hull[1], hull[1]))
    return sorted(found, key=lambda p: p.first.vertices)


def portraits_linked(p1: QcPortrait, p2: QcPortrait, lam1=None, lam2=None) -> bool:
    """Coordinate-wise strong linkage or shared spikes, per Definition of linkage.

    With laminations supplied, sharing an all-critical triangle gap also
    counts as linked.
    """
    coord_ok = all(
        strongly_linked(a, b) or share_spike(a, b)
        for a, b in ((p1.first, p2.first), (p1.second, p2.second))
    )
    if coord_ok:
        return True
    if lam1 is not None and lam2 is not None:
        tri1 = _all_critical_triangles(lam1)
        tri2 = _all_critical_triangles(lam2)
        if tri1 & tri2:
            return True
    return False


def _all_critical_triangles(lam: GeoLamination):
    fs = face_structure(lam)
    out = set()
    for fi in fs.face_indices():
        verts = set(fs.vertex_tuple(fi))
        if len(verts) != 3:
            continue
        pairs = fs.edge_pairs(fi)
        if len(pairs) == 3 and all(lam.is_critical_pair(p) for p in pairs):
            out.add(frozenset(lam.angle(v) for v in verts))
    return out


# ---------------------------------------------------------------------------
# quadratic refixed major


def quad_refixed_major(c: Chord, depths=None):
    """Unique periodic leaf from the periodic endpoint of a degree-2 critical leaf.

    For a critical leaf (degree 2) with exactly one periodic endpoint p of
    period k > 1, exactly one chord from p to a period-k-compatible point
    generates a pullback lamination exhibiting a period-k fatou(2) gap with
    that chord refixed and the critical leaf inside.  Returns the chord and
    the certifying gap data; zero or multiple survivors raise IntegrityError.
    """
    m2 = CircleMap(2)
    if not is_critical(m2, c):
        raise DomainError(f"{c} is not critical for degree 2")
    pa, pb = is_periodic(m2, c.a), is_periodic(m2, c.b)
    if pa == pb:
        raise DomainError("need exactly one periodic endpoint")
    p = c.a if pa else c.b
    k = period_of(m2, p)
    if k <= 1:
        raise DomainError("the periodic endpoint must have period > 1")
    if depths is None:
        depths = (max(2 * k, 6), 3 * k)

    den = 2**k - 1
    candidates = []
    for j in range(den):
        x = Fraction(j, den)
        if x == p:
            continue
        mx = chord(p, x)
        orbit = [mx] + _orbit_chords(mx, m2)
        orbit = list(dict.fromkeys(orbit))
        good = all(not is_linked(o, c) for o in orbit) and all(
            not is_linked(o1, o2) for o1, o2 in combinations(orbit, 2)
        )
        if good:
            candidates.append(mx)

    survivors = candidates
    last_verified = []
    for depth in depths:
        verified = []
        for mx in survivors:
            cert = _verify_refixed_major(c, mx, k, depth)
            if cert is not None:
                verified.append((mx, cert))
        if len(verified) == 1:
            return verified[0]
        last_verified = verified
        if verified:  # narrow the field and look deeper
            survivors = [mx for mx, _ in verified]
    raise IntegrityError(
        f"refixed-major candidates for {c}: expected exactly 1 survivor, "
        f"got {len(last_verified)} at depth {depths[-1]}"
    )


def _verify_refixed_major(c: Chord, mx: Chord, k: int, depth: int):
    """Certify a candidate by building its pullback and classifying the gap."""
    m2 = CircleMap(2)
    try:
        lam = pullback_build({mx}, m2, depth, policy_for_cuts(2, [c]))
    except DomainError:
        return None
    fs = face_structure(lam)
    pair = lam.to_pair(mx)
    if pair is None:
        return None
    other = chord(c.a) if mx.a in c.endpoints or mx.b in c.endpoints else None
    q_off = c.b if c.a in mx.endpoints else c.a
    for fi in (fs.face_of_directed_chord(*pair), fs.face_of_directed_chord(pair[1], pair[0])):
        if fi is None:
            continue
        g = fs.to_gap(fi)
        if not _point_on_gap_circle(lam, fs, fi, q_off):
            continue
        klass = classify_gap(lam, g)
        if (
            klass.status == "periodic"
            and klass.kind == "fatou"
            and klass.degree == 2
            and klass.period == k
            and mx in klass.refixed_edges
        ):
            return {
                "gap_vertices": g.vertices,
                "period": k,
                "depth": depth,
                "refixed": mx,
            }
    return None


def _point_on_gap_circle(lam, fs, fi, x: Fraction):
    """Whether the angle lies on the face's circle support (vertex or arc)."""
    if lam.modulus % x.denominator:
        scaled = None
    else:
        scaled = x.numerator * (lam.modulus // x.denominator)
    if scaled is not None and scaled in set(fs.vertex_tuple(fi)):
        return True
    mod = lam.modulus
    for u, w in fs.arcs(fi):
        span = (w - u) % mod
        if scaled is not None:
            if (scaled - u) % mod <= span:
                return True
        else:
            off = (x - Fraction(u, mod)) % 1
            if off <= Fraction(span, mod):
                return True
    return False


# ---------------------------------------------------------------------------
# realization


def realize_portrait(p: QcPortrait, depth: int) -> GeoLamination:
    """Realize an admissible portrait as a lamination it is privileged for.

    Pullback, then cleaning; when the first element lands inside a fatou(2)
    gap whose collapse sends it to a degree-2 critical leaf with a periodic
    endpoint of period > 1, the associated refixed-major cycle is lifted and
    inserted, and the lamination re-cleaned.  Siegel-capture taxonomies are
    rejected with ExcludedCaseError.
    """
    ok, diagnostics = is_admissible(p, with_diagnostics=True)
    if not ok:
        raise DomainError(f"portrait is not admissible: {diagnostics}")
    lam = proper_core(build_portrait_lamination(p, depth))
    tax = critical_taxonomy(lam, p.d_chord)
    if tax.siegel_flagged:
        raise ExcludedCaseError("the portrait realizes a capture-type configuration")
    priv, _ = is_privileged(lam, p, with_witness=True)
    if priv:
        return lam.with_provenance(realized=str(p.first.vertices), restructured=False)

    host = _fatou_host_of(lam, p.first)
    if host is None:
        raise IntegrityError("portrait not privileged and no fatou(2) host gap found")
    gap, klass = host
    psi = psi_collapse(lam, gap, klass)
    zvals = {psi(v) for v in p.first.vertex_set}
    if len(zvals) != 2:
        raise IntegrityError(f"collapse of the first element is not a chord: {zvals}")
    za, zb = sorted(zvals)
    if (zb - za) != Fraction(1, 2):
        raise IntegrityError("collapse of the first element is not critical for degree 2")
    m2 = CircleMap(2)
    c2 = chord(za, zb)
    if not (is_periodic(m2, za) ^ is_periodic(m2, zb)):
        raise IntegrityError("collapsed leaf lacks the expected single periodic endpoint")
    mx, cert = quad_refixed_major(c2)
    lifted = lift_gap(lam, gap, psi, cert["gap_vertices"], target_refixed=mx)
    lam2 = proper_core(insert_cycle(lam, [lifted.refixed_edge]))
    priv2, _ = is_privileged(lam2, p, with_witness=True)
    if not priv2:
        raise IntegrityError("restructured lamination still not privileged")
    return lam2.with_provenance(realized=str(p.first.vertices), restructured=True)


def _fatou_host_of(lam: GeoLamination, q: CriticalQuad):
    """The fatou(2) gap whose boundary carries all vertices of q, if any."""
    qverts = set(q.vertex_set)
    fs = face_structure(lam)
    best = None
    for fi in fs.face_indices():
        verts = fs.vertex_tuple(fi)
        if not verts:
            continue
        angles = {lam.angle(v) for v in verts}
        if not qverts <= angles:
            # vertices may sit on boundary arcs rather than being represented
            if not all(
                _point_on_gap_circle(lam, fs, fi, x) for x in qverts
            ):
                continue
        g = fs.to_gap(fi)
        if gap_degree(lam, g) < 2:
            continue
        klass = classify_gap(lam, g)
        if klass.status == "periodic" and klass.kind == "fatou" and klass.degree == 2:
            return (g, klass)
        best = best
    return None


# ---------------------------------------------------------------------------
# the exceptional non-linked shape


@dataclass(frozen=True, slots=True)
class CaseVResult:
    verdict: str  # 'replaced' | 'same-class'
    portrait: object  # the replacement portrait, or None


def resolve_case_v(p1: QcPortrait, p2: QcPortrait, lam2: GeoLamination) -> CaseVResult:
    """Resolve the one non-linked shape of portrait pairs over the same leaf.

    The shape: both first elements are quadrilaterals whose spikes run from
    the fixed leaf's endpoints to the third preimage v of its image point.
    Periodic v: the second portrait's quadrilateral is replaced by the
    critical leaf on the triangle edge shared with the first portrait's
    spike, re-verified privileged and linked.  Non-periodic v: the two
    laminations already generate the same classes.
    """
    if p1.second != p2.second:
        raise DomainError("portraits must share the fixed critical leaf")
    m = CircleMap(3)
    d_chord = p1.d_chord
    d_img = map_angle(m, d_chord.a)
    v = next(
        x for x in ((d_img + j) / 3 for j in range(3)) if x not in d_chord.endpoints
    )
    if portraits_linked(p1, p2):
        raise DomainError("portraits are linked; not the exceptional shape")
    ea, eb = chord(v, d_chord.a), chord(v, d_chord.b)
    s1, s2 = set(p1.first.spikes), set(p2.first.spikes)
    shape = (ea in s1 and eb in s2) or (eb in s1 and ea in s2)
    if not shape:
        raise DomainError("portrait pair does not match the exceptional shape")
    if not is_periodic(m, v):
        return CaseVResult(verdict="same-class", portrait=None)
    shared = ea if ea in s1 else eb
    replacement = portrait(leaf_quad(shared), p2.second)
    if not is_privileged(lam2, replacement):
        raise IntegrityError("replacement portrait is not privileged at this depth")
    if not portraits_linked(p1, replacement):
        raise IntegrityError("replacement portrait failed to link")
    return CaseVResult(verdict="replaced", portrait=replacement)
