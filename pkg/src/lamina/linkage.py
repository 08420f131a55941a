"""Accordions, orderly dynamics, spike chains, and the statement-audit registry.

An audit is a falsification harness: it scans a corpus for instances of a
combinatorial statement's hypothesis and checks the conclusion exactly,
reporting witnesses for any failure.  Nothing here proves anything; audits
only fail or pass at the represented depth.  Each audit's checker is exposed
separately so planted negative controls can prove the harness can fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .circle import (
    CircleMap,
    cyclically_ordered,
    is_periodic,
    orbit_profile,
    period_of,
)
from .chords import (
    Chord,
    chord,
    chord_image,
    is_critical,
    is_linked,
    min_arc_length,
    strip_entry_check,
)
from .classify import classify_gap
from .errors import DomainError, NotFoundError
from .faces import face_structure, gap_degree
from .lamination import GeoLamination
from .pullback import forward_closure

QUARTER = Fraction(1, 4)
THIRD = Fraction(1, 3)


# ---------------------------------------------------------------------------
# accordions


@dataclass(frozen=True, slots=True)
class Accordion:
    base: Chord
    against: Chord
    members: tuple  # base plus the forward images of `against` linked with it


def accordion(ell1: Chord, ell2: Chord, m: CircleMap) -> Accordion:
    """Members of the forward orbit of ell2 linked with ell1, plus ell1."""
    orbit = sorted(forward_closure({ell2}, m))
    members = [ell1] + [c for c in orbit if is_linked(c, ell1)]
    return Accordion(base=ell1, against=ell2, members=tuple(members))


@dataclass(frozen=True, slots=True)
class OrderlyReport:
    verdict: str  # 'orderly-a' | 'orderly-b' | 'orderly-c' | 'not-orderly'
    witness: object  # first order-breaking iterate, or (r, m, n) for orderly-b

    def __bool__(self):
        return self.verdict != "not-orderly"


def _hulls_meet(vs1, vs2) -> bool:
    """Whether the convex hulls of two circle point sets intersect."""
    s1, s2 = set(vs1), set(vs2)
    if s1 & s2:
        return True
    pts1 = sorted(s1)
    others = sorted(s2)
    # disjoint hulls iff all of one set sits inside a single gap of the other
    for i, a in enumerate(pts1):
        b = pts1[(i + 1) % len(pts1)]
        span = (b - a) % 1
        if all(Fraction(0) < (x - a) % 1 < span for x in others):
            return False
    return len(pts1) < 2 or len(others) < 2


def orderly_report(ell_a: Chord, ell_x: Chord, m: CircleMap) -> OrderlyReport:
    """Track the hull of two linked chords along the joint forward orbit.

    Order preservation of the four marked points is checked at every iterate
    up to orbit closure; verdicts follow the pairwise-disjoint-images,
    positively-ordered-chain, and equal-eventual-period alternatives, the
    last taking precedence for rational data (where it subsumes the chain
    case whenever it applies).
    """
    if not is_linked(ell_a, ell_x):
        raise DomainError("the two chords must be linked")
    a, b = ell_a.endpoints
    inside = [p for p in ell_x.endpoints if a < p < b]
    x = inside[0]
    y = ell_x.a if x == ell_x.b else ell_x.b

    quad = (a, x, b, y)
    orbit = []
    seen = {}
    cur = quad
    while cur not in seen:
        seen[cur] = len(orbit)
        orbit.append(cur)
        if not cyclically_ordered(list(cur)):
            return OrderlyReport(verdict="not-orderly", witness=len(orbit) - 1)
        cur = tuple((m.degree * t) % 1 for t in cur)

    hulls = [tuple(sorted(set(q))) for q in orbit]
    distinct = len(set(hulls)) == len(hulls)
    if distinct and all(
        not _hulls_meet(h1, h2) for h1, h2 in combinations(hulls, 2)
    ):
        return OrderlyReport(verdict="orderly-a", witness=None)

    periods = {orbit_profile(m, t).period for t in quad}
    if len(periods) == 1:
        return OrderlyReport(verdict="orderly-c", witness=None)

    found = None
    for r in range(len(orbit)):
        for mm in range(1, len(orbit) - r):
            if r + mm < len(orbit) and _hulls_meet(hulls[r], hulls[r + mm]):
                found = (r, mm)
                break
        if found:
            break
    if found:
        r, mm = found
        for n in range(1, len(orbit)):
            idx = (r + mm * n) % len(orbit)
            if hulls[idx] == hulls[0] and _chain_positively_ordered(orbit, r, mm, n):
                return OrderlyReport(verdict="orderly-b", witness=(r, mm, n))
    return OrderlyReport(verdict="not-orderly", witness="no-alternative-matched")


def _chain_positively_ordered(orbit, r, mm, n):
    """Positively-ordered chain check for the return alternative."""
    take = [orbit[(r + i * mm) % len(orbit)] for i in range(n)]
    a_chain = [q[0] for q in take]
    x_chain = [q[1] for q in take]
    if len(take) < 3:
        return True
    return cyclically_ordered(a_chain) and cyclically_ordered(x_chain)


# ---------------------------------------------------------------------------
# spike chains


def spike_chain_collapse(lam1: GeoLamination, lam2: GeoLamination, ell1: Chord, ell2: Chord):
    """Search both laminations for spike chains joining adjacent endpoints.

    Two chains of critical leaves (spikes), one per lamination, must connect
    the same two adjacent endpoints of the given non-disjoint distinct
    leaves; returns the chains when both exist.
    """
    if ell1 == ell2:
        raise DomainError("the leaves must be distinct")
    if not lam1.has_leaf(ell1):
        raise NotFoundError(f"{ell1} is not a leaf of the first lamination")
    if not lam2.has_leaf(ell2):
        raise NotFoundError(f"{ell2} is not a leaf of the second lamination")
    shared = set(ell1.endpoints) & set(ell2.endpoints)
    if not (shared or is_linked(ell1, ell2)):
        raise DomainError("the leaves must be non-disjoint")

    all_points = sorted(set(ell1.endpoints) | set(ell2.endpoints))

    def adjacent(e1, e2):
        others = [p for p in all_points if p not in (e1, e2)]
        span = (e2 - e1) % 1
        return not any(0 < (p - e1) % 1 < span for p in others)

    spikes1 = _spikes(lam1)
    spikes2 = _spikes(lam2)
    for e1 in ell1.endpoints:
        for e2 in ell2.endpoints:
            if e1 == e2:
                continue
            for lo, hi in ((e1, e2), (e2, e1)):
                if not adjacent(lo, hi):
                    continue
                chain1 = _spike_path(spikes1, lo, hi)
                chain2 = _spike_path(spikes2, lo, hi)
                if chain1 and chain2:
                    return {"collapses": True, "chains": (tuple(chain1), tuple(chain2))}
    return {"collapses": False, "chains": None}


def _spikes(lam: GeoLamination):
    out = {}
    for p in lam.pairs:
        if p[0] != p[1] and lam.is_critical_pair(p):
            c = lam.to_chord(p)
            out.setdefault(c.a, []).append(c)
            out.setdefault(c.b, []).append(c)
    return out


def _spike_path(spikes, start, goal):
    """Breadth-first chain of spikes from start to goal inside the arc."""
    span = (goal - start) % 1

    def inside(p):
        return (p - start) % 1 <= span

    frontier = [(start, [])]
    visited = {start}
    while frontier:
        point, path = frontier.pop(0)
        for c in spikes.get(point, []):
            nxt = c.a if point == c.b else c.b
            if nxt == goal:
                return path + [c]
            if nxt not in visited and inside(nxt):
                visited.add(nxt)
                frontier.append((nxt, path + [c]))
    return None


# ---------------------------------------------------------------------------
# audit registry


@dataclass(frozen=True, slots=True)
class AuditResult:
    check_id: str
    instances: int
    failures: tuple

    @property
    def passed(self):
        return not self.failures

    def to_json_dict(self):
        return {
            "checkId": self.check_id,
            "instances": self.instances,
            "failures": [str(w) for w in self.failures],
        }


def _incident_map(lam: GeoLamination):
    inc = {}
    for p in lam.pairs:
        if p[0] != p[1]:
            inc.setdefault(p[0], []).append(p)
            inc.setdefault(p[1], []).append(p)
    return inc


def _audit_triod(lam: GeoLamination):
    """Order preservation on arcs and triods of leaves at a shared vertex."""
    inc = _incident_map(lam)
    instances = 0
    failures = []
    for v, pairs in inc.items():
        if len(pairs) < 2:
            continue
        neighbors = sorted({q[0] if q[1] == v else q[1] for q in pairs})
        for size in (2, 3):
            for combo in combinations(neighbors[:8], size):
                pts = [v, *combo]
                imgs = [lam.image_point(x) for x in pts]
                if len(set(imgs)) != len(pts):
                    continue  # the map is not one-to-one on this triod
                instances += 1
                order = sorted(range(len(pts)), key=lambda i: pts[i])
                if not cyclically_ordered([imgs[i] for i in order]):
                    failures.append(
                        ("triod-order-broken", tuple(lam.angle(x) for x in pts))
                    )
    return instances, failures


def check_sibling_fan(image_of, vertex, x, others):
    """Conclusion check: extra leaves at the wedge vertex match an allowed image.

    `others` are the far endpoints of leaves at the vertex besides the
    sibling pair; each must map to the image of x or of the vertex, and
    there are at most 2d-3 = 3 of them.
    """
    allowed = {image_of(x), image_of(vertex)}
    bad = [t for t in others if image_of(t) not in allowed]
    if bad:
        return ("fan-image-outside-dichotomy", vertex, tuple(bad))
    if len(others) > 3:
        return ("fan-too-large", vertex, tuple(others))
    return None


def _audit_nocrit(lam: GeoLamination):
    inc = _incident_map(lam)
    instances = 0
    failures = []
    for v, pairs in inc.items():
        if len(pairs) < 3:
            continue
        neighbors = sorted({q[0] if q[1] == v else q[1] for q in pairs})
        img = {x: lam.image_point(x) for x in neighbors}
        for x, z in combinations(neighbors, 2):
            if img[x] != img[z] or x == z:
                continue
            if lam.image_point(v) in (img[x],):
                continue  # leaves at v through x, z must be non-critical
            instances += 1
            others = [t for t in neighbors if t not in (x, z)]
            witness = check_sibling_fan(lam.image_point, v, x, others)
            if witness:
                failures.append(
                    (witness[0], lam.angle(v), tuple(lam.angle(t) for t in witness[2]))
                )
    return instances, failures


def check_same_period(lam: GeoLamination, p):
    pa, pb = lam.is_periodic_point(p[0]), lam.is_periodic_point(p[1])
    if not (pa or pb):
        return None
    if pa != pb:
        return ("one-periodic-endpoint", lam.to_chord(p))
    m = lam.map
    ka = period_of(m, lam.angle(p[0]))
    kb = period_of(m, lam.angle(p[1]))
    if ka != kb:
        return ("periods-differ", lam.to_chord(p), ka, kb)
    return None


def _audit_sameperiod(lam: GeoLamination):
    instances = 0
    failures = []
    for p in lam.pairs:
        if p[0] == p[1]:
            continue
        if lam.is_periodic_point(p[0]) or lam.is_periodic_point(p[1]):
            instances += 1
            w = check_same_period(lam, p)
            if w:
                failures.append(w)
    return instances, failures


def _audit_long(lam: GeoLamination):
    """Every leaf has an image both of whose arcs reach length 1/4.

    Memoized along the image graph; a leaf whose orbit leaves the
    represented set before getting long cannot be certified and fails.
    """
    mod = lam.modulus
    quarter = mod / 4
    present = lam.pair_set()
    verdict = {}

    def is_long(p):
        span = p[1] - p[0]
        return min(span, mod - span) * 4 >= mod

    def resolve(p):
        path = []
        cur = p
        while True:
            if cur in verdict:
                val = verdict[cur]
                break
            if cur in (seen := set(path)):
                val = False  # cycled without ever getting long
                break
            if is_long(cur):
                val = True
                break
            if cur not in present:
                val = False  # orbit left the represented set: cannot certify
                break
            path.append(cur)
            cur = lam.image_pair(cur)
        for q in path:
            verdict[q] = val
        return val

    instances = 0
    failures = []
    for p in lam.pairs:
        if p[0] == p[1]:
            continue
        instances += 1
        if not resolve(p):
            failures.append(("never-long", lam.to_chord(p)))
    return instances, failures


def check_strip_entry(c: Chord, max_iter=256):
    report = strip_entry_check(c, max_iter)
    if report["first_entry_index"] is not None and not report["endpoints_in_distinct_arcs"]:
        return ("strip-entry-same-arc", c, report["first_entry_index"])
    return None


def _audit_csl(lam: GeoLamination):
    instances = 0
    failures = []
    for p in lam.pairs:
        if p[0] == p[1]:
            continue
        c = lam.to_chord(p)
        if QUARTER <= min_arc_length(c) < THIRD:
            instances += 1
            w = check_strip_entry(c)
            if w:
                failures.append(w)
    return instances, failures


def check_refixed_length(refixed: Chord):
    span = min_arc_length(refixed)
    if not (QUARTER <= span < THIRD):
        return ("refixed-length-out-of-window", refixed, span)
    return None


def _audit_vperiod(lam: GeoLamination):
    """Refixed edges of degree-2 gaps whose sibling edge sits in a finite
    critical face must have length in [1/4, 1/3) and be unique."""
    fs = face_structure(lam)
    m = lam.map
    instances = 0
    failures = []
    for fi in fs.face_indices():
        verts = fs.vertex_tuple(fi)
        if not verts:
            continue
        if len({lam.image_point(v) for v in verts}) >= len(set(verts)):
            continue
        g = fs.to_gap(fi)
        if gap_degree(lam, g) < 2:
            continue
        klass = classify_gap(lam, g)
        if klass.status != "periodic" or klass.kind != "fatou" or klass.degree != 2:
            continue
        for refixed in klass.refixed_edges:
            if refixed.degenerate:
                continue
            siblings = [
                e
                for e in g.edges
                if e != refixed and chord_image(m, e) == chord_image(m, refixed)
            ]
            if not siblings:
                continue
            hosted = [
                s for s in siblings if _edge_in_finite_critical_face(lam, fs, s)
            ]
            if not hosted:
                continue
            instances += 1
            w = check_refixed_length(refixed)
            if w:
                failures.append(w)
            if len(klass.refixed_edges) > 1:
                failures.append(("refixed-edge-not-unique", tuple(klass.refixed_edges)))
    return instances, failures


def _edge_in_finite_critical_face(lam, fs, edge):
    pair = lam.to_pair(edge)
    if pair is None:
        return False
    for fi in (
        fs.face_of_directed_chord(*pair),
        fs.face_of_directed_chord(pair[1], pair[0]),
    ):
        if fi is None:
            continue
        g = fs.to_gap(fi)
        if gap_degree(lam, g) >= 2:
            klass = classify_gap(lam, g)
            if klass.kind in ("finite", "identity-return", "all-critical") or (
                klass.status == "collapsing"
            ):
                return True
    return False


def check_concatenation_witness(m: CircleMap, leaf: Chord, n: int):
    """Conclusion of the concatenation statement, with witness validation.

    The n-th image must genuinely share an endpoint with the leaf, and both
    endpoints must then have finite orbit profiles (be preperiodic).
    """
    img = leaf
    for _ in range(n):
        img = chord_image(m, img)
    if not set(img.endpoints) & set(leaf.endpoints):
        return ("claimed-concatenation-absent", leaf, n)
    for e in leaf.endpoints:
        profile = orbit_profile(m, e)
        if profile.period < 1:
            return ("endpoint-not-preperiodic", e)
    return None


def _audit_l48(lam: GeoLamination):
    m = lam.map
    instances = 0
    failures = []
    for p in lam.pairs:
        if p[0] == p[1]:
            continue
        leaf = lam.to_chord(p)
        ends = set(leaf.endpoints)
        img = leaf
        seen = set()
        n = 0
        while img not in seen:
            seen.add(img)
            img = chord_image(m, img)
            n += 1
            if not img.degenerate and set(img.endpoints) & ends and img != leaf:
                instances += 1
                w = check_concatenation_witness(m, leaf, n)
                if w:
                    failures.append(w)
                break
    return instances, failures


def _audit_perde(portrait_obj):
    """No eventual image of the first element crosses the all-critical
    triangle's edges, when the image point of the fixed leaf is a minor
    endpoint."""
    from .portraits import minor  # local import to avoid a cycle

    m = CircleMap(3)
    p = portrait_obj
    d_chord = p.d_chord
    d_img = (m.degree * d_chord.a) % 1
    mn = minor(p)
    if d_img not in mn.endpoints:
        return 0, []
    v = next(x for x in ((d_img + j) / 3 for j in range(3)) if x not in d_chord.endpoints)
    tri = [chord(d_chord.a, d_chord.b), chord(d_chord.b, v), chord(v, d_chord.a)]
    failures = []
    img = mn
    seen = set()
    while img not in seen:
        seen.add(img)
        for e in tri:
            if is_linked(img, e):
                failures.append(("image-crosses-triangle-edge", img, e))
        img = chord_image(m, img)
    return 1, failures


def _audit_perfan(lam1: GeoLamination, lam2: GeoLamination):
    """The map preserves the order of the leaf-end fan at every periodic point."""
    instances = 0
    failures = []
    fans = {}
    for lam in (lam1, lam2):
        for p in lam.pairs:
            if p[0] == p[1]:
                continue
            c = lam.to_chord(p)
            for v, o in ((c.a, c.b), (c.b, c.a)):
                fans.setdefault(v, set()).add(o)
    m = CircleMap(lam1.degree)
    for v, others in sorted(fans.items()):
        if not is_periodic(m, v) or not others:
            continue
        pts = sorted({v} | others)
        imgs = [(m.degree * t) % 1 for t in pts]
        if len(set(imgs)) != len(pts):
            continue
        instances += 1
        if not cyclically_ordered(imgs):
            failures.append(("fan-order-broken", v, tuple(pts)))
    return instances, failures


def _audit_nopercollapse(lam1: GeoLamination, lam2: GeoLamination):
    """Leaves meeting a periodic leaf of the other lamination are periodic
    of the same vertex period, with order preserved."""
    m = CircleMap(lam1.degree)
    instances = 0
    failures = []
    periodic1 = [
        lam1.to_chord(p)
        for p in lam1.pairs
        if p[0] != p[1]
        and lam1.is_periodic_point(p[0])
        and lam1.is_periodic_point(p[1])
    ]
    leaves2 = [lam2.to_chord(p) for p in lam2.pairs if p[0] != p[1]]
    for ell1 in periodic1:
        n = period_of(m, ell1.a)
        if period_of(m, ell1.b) != n:
            continue
        for ell2 in leaves2:
            meets = is_linked(ell1, ell2) or set(ell1.endpoints) & set(ell2.endpoints)
            if not meets or ell1 == ell2:
                continue
            instances += 1
            ok = (
                is_periodic(m, ell2.a)
                and is_periodic(m, ell2.b)
                and period_of(m, ell2.a) == n
                and period_of(m, ell2.b) == n
            )
            if not ok:
                failures.append(("meeting-leaf-not-periodic", ell1, ell2, n))
    return instances, failures


def _audit_limunlink(lam1: GeoLamination, lam2: GeoLamination, bound=64):
    """No leaf of one lamination crosses more than `bound` leaves of the other."""
    instances = 0
    failures = []
    chords2 = [lam2.to_chord(p) for p in lam2.pairs if p[0] != p[1]]
    for p in lam1.pairs:
        if p[0] == p[1]:
            continue
        c = lam1.to_chord(p)
        instances += 1
        count = sum(1 for c2 in chords2 if is_linked(c, c2))
        if count > bound:
            failures.append(("crosses-too-many", c, count, bound))
    return instances, failures


def _audit_fgapproj(lam1: GeoLamination, lam2: GeoLamination):
    """Leaves of the second lamination meet any gap boundary of the first in
    a single collapse class."""
    from .classify import psi_collapse

    fs = face_structure(lam1)
    instances = 0
    failures = []
    for fi in fs.face_indices():
        verts = fs.vertex_tuple(fi)
        if len(verts) < 3:
            continue
        g = fs.to_gap(fi)
        klass = classify_gap(lam1, g)
        if klass.status != "periodic" or klass.kind != "fatou" or klass.degree < 2:
            continue
        try:
            psi = psi_collapse(lam1, g, klass)
        except Exception:
            continue
        edges = list(g.edges)
        vset = set(g.vertices)
        for p2 in lam2.pairs:
            if p2[0] == p2[1]:
                continue
            ell2 = lam2.to_chord(p2)
            met_values = set()
            for e in edges:
                if is_linked(ell2, e) or set(e.endpoints) & set(ell2.endpoints):
                    met_values.add(psi(e.a))
            for v in set(ell2.endpoints) & vset:
                met_values.add(psi(v))
            if not met_values:
                continue
            instances += 1
            if len(met_values) > 1:
                failures.append(("projection-not-degenerate", ell2, tuple(sorted(met_values))))
    return instances, failures


def _audit_impiso(lam: GeoLamination, radius=None):
    """No improper leaf is approximated on both sides at the finest scale."""
    if radius is None:
        radius = Fraction(1, 3 * lam.max_denominator())
    instances = 0
    failures = []
    nondeg = [p for p in lam.pairs if p[0] != p[1]]
    mod = lam.modulus
    eps = radius * mod
    for p in nondeg:
        if lam.is_periodic_point(p[0]) == lam.is_periodic_point(p[1]):
            continue
        instances += 1
        sides = {1: False, -1: False}
        for q in nondeg:
            if q == p:
                continue
            for sign in (1, -1):
                da = (sign * (q[0] - p[0])) % mod
                db = (sign * (q[1] - p[1])) % mod
                if 0 < da <= eps and 0 < db <= eps:
                    sides[sign] = True
        if sides[1] and sides[-1]:
            failures.append(("improper-two-sided-limit", lam.to_chord(p), radius))
    return instances, failures


_REGISTRY = {
    "TRIOD": ("lamination", _audit_triod),
    "NOCRIT": ("lamination", _audit_nocrit),
    "SAMEPERIOD": ("lamination", _audit_sameperiod),
    "LONG": ("lamination", _audit_long),
    "CSL": ("lamination", _audit_csl),
    "VPERIOD": ("lamination", _audit_vperiod),
    "PERDE": ("portrait", _audit_perde),
    "PERFAN": ("lamination-pair", _audit_perfan),
    "NOPERCOLLAPSE": ("lamination-pair", _audit_nopercollapse),
    "LIMUNLINK": ("lamination-pair", _audit_limunlink),
    "FGAPPROJ": ("lamination-pair", _audit_fgapproj),
    "L48": ("lamination", _audit_l48),
    "IMPISO": ("lamination", _audit_impiso),
}


def audit_ids():
    return sorted(_REGISTRY)


def run_audit(check_id: str, corpus) -> AuditResult:
    """Run one registered audit over every applicable corpus item.

    `corpus` is a list of laminations, lamination pairs, or portraits,
    matching the check's arity; failures carry full witnesses.
    """
    if check_id not in _REGISTRY:
        raise DomainError(f"unknown audit id {check_id!r}; known: {audit_ids()}")
    arity, fn = _REGISTRY[check_id]
    instances = 0
    failures = []
    for item in corpus:
        if arity == "lamination-pair":
            got_i, got_f = fn(*item)
        else:
            got_i, got_f = fn(item)
        instances += got_i
        failures.extend(got_f)
    return AuditResult(check_id=check_id, instances=instances, failures=tuple(failures))
