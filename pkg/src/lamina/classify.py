"""Dynamical classification of gaps, boundary collapse maps, critical taxonomy.

A periodic gap of degree r > 1 behaves like the full circle map of degree r
on its boundary; the collapse map built here realizes that semiconjugacy by
itinerary coding, exactly, on rational angles.  "Infinite" gaps cannot be
certified at finite depth, so the operational proxy is a return map that is
not onto the represented vertex set (equivalently, the vertex count grows
when the build depth grows); reports are labelled accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import prod

from .circle import CircleMap, is_periodic, map_angle, period_of
from .chords import Chord, chord, is_critical, is_linked
from .errors import DomainError, IntegrityError, NotFoundError, PartialMapError
from .faces import Gap, GapClass, face_structure, gap_degree
from .lamination import GeoLamination, endpoint_partition


def _least_fixed_period(lam, fs, fi, max_period):
    """Least k <= max_period with a point of period dividing k on the closure.

    Fixed points of the k-th iterate are j/(d^k - 1); membership on each
    boundary arc reduces to an integer range check, so the scan is exact and
    cheap for any k.
    """
    mod = lam.modulus
    verts = set(fs.vertex_tuple(fi))
    arcs = fs.arcs(fi)
    d = lam.degree
    for k in range(1, max_period + 1):
        q = d**k - 1
        for v in verts:
            if (v * q) % mod == 0:
                return k
        for u, w in arcs:
            span = (w - u) % mod
            lo = -((-u * q) // mod)  # ceil(u*q/mod)
            hi = ((u + span) * q) // mod
            if hi >= lo:
                return k
    return None


def _fixed_points_on_closure(lam, fs, fi, k, cap=64):
    """All period-dividing-k points on the face closure (up to cap many)."""
    mod = lam.modulus
    d = lam.degree
    q = d**k - 1
    out = []
    for v in sorted(set(fs.vertex_tuple(fi))):
        if (v * q) % mod == 0:
            out.append(Fraction(v, mod))
    for u, w in fs.arcs(fi):
        span = (w - u) % mod
        lo = -((-u * q) // mod)
        hi = ((u + span) * q) // mod
        for j in range(lo, min(hi, lo + cap) + 1):
            x = Fraction(j % q, q)
            if x not in out:
                out.append(x)
        if hi - lo > cap:
            break
    return sorted(set(out))


def _return_degree(lam, fs, fi, k, probes):
    """Degree of the k-th-iterate return map on the gap closure.

    Counts the preimage points of a probe on the closure: vertex preimages
    are merged along boundary edges the return map collapses onto the probe;
    arc-interior preimages reduce to integer range counts.  Several probes
    are tried and the smallest count wins (unresolved arcs only inflate it).
    """
    mod = lam.modulus
    d = lam.degree
    dk = d**k
    verts = sorted(set(fs.vertex_tuple(fi)))
    arcs = fs.arcs(fi)
    edges = fs.edge_pairs(fi)

    def ret(x):
        for _ in range(k):
            x = (x * d) % mod
        return x

    rverts = {v: ret(v) for v in verts}
    counts = []
    for p in probes:
        if mod % p.denominator:
            continue
        p_sc = p.numerator * (mod // p.denominator)
        vpre = [v for v in verts if rverts[v] == p_sc]
        parent = {v: v for v in vpre}

        def root(y):
            while parent[y] != y:
                y = parent[y]
            return y

        for u, w in edges:
            if u in parent and w in parent:
                parent[root(u)] = root(w)
        total = len({root(v) for v in vpre})
        vset = set(vpre)
        for u, w in arcs:
            span = (w - u) % mod
            lo_num = u * dk - p_sc
            lo = -((-lo_num) // mod)  # ceil(lo_num / mod)
            hi = ((u + span) * dk - p_sc) // mod
            n = max(0, hi - lo + 1)
            # arc ends are vertices; do not double-count preimages sitting there
            if n and lo_num % mod == 0 and u in vset:
                n -= 1
            end_num = (u + span) * dk - p_sc
            if n and end_num % mod == 0 and ((u + span) % mod) in vset:
                n -= 1
            total += max(0, n)
        counts.append(total)
    return min(counts) if counts else 1


def classify_gap(lam: GeoLamination, gap: Gap, max_period: int = 24) -> GapClass:
    """Classify a gap under the induced boundary dynamics.

    The period is the least k with a period-k point on the gap closure (an
    exact test; sound because a degree-r return map admits no boundary point
    of lower period than the gap's own).  Periodic gaps come back as finite,
    identity-return (return fixes every vertex), fatou(r), or siegel-suspect
    (degree one, boundary not return-recurrent at depth); gaps whose hull
    collapses get a collapsing tag and undetected periods a preperiodic tag.
    """
    fs = face_structure(lam)
    view = fs.view
    fi = fs.find_face(gap)
    verts = fs.vertex_tuple(fi)

    if not verts:
        # no non-degenerate leaves: the whole disk, fixed, full degree
        return GapClass(
            status="periodic",
            kind="fatou",
            period=1,
            preperiod=0,
            degree=lam.degree,
            refixed_edges=(),
            refixed_vertices=(),
            orbit=((),),
        )

    start_gap = fs.to_gap(fi)
    images = {view.image_point(v) for v in verts}
    if len(images) <= 2:
        return GapClass(
            status="collapsing",
            kind="all-critical" if len(images) == 1 else start_gap.kind,
            period=0,
            preperiod=0,
            degree=gap_degree(lam, start_gap),
            refixed_edges=(),
            refixed_vertices=(),
            orbit=(start_gap.vertices,),
        )

    k = _least_fixed_period(lam, fs, fi, max_period)
    if k is None:
        return GapClass(
            status="preperiodic",
            kind=start_gap.kind,
            period=0,
            preperiod=0,
            degree=gap_degree(lam, start_gap),
            refixed_edges=(),
            refixed_vertices=(),
            orbit=(start_gap.vertices,),
        )

    def ret(x):
        for _ in range(k):
            x = view.image_point(x)
        return x

    vset = list(dict.fromkeys(verts))
    returned = {v: ret(v) for v in vset}
    onto = set(returned.values()) == set(vset)

    refixed_edges = []
    pool = {v for v in vset if returned[v] == v}
    for u, w in sorted(fs.edge_pairs(fi)):
        if returned.get(u) == u and returned.get(w) == w:
            refixed_edges.append(chord(view.angle(u), view.angle(w)))
            pool.discard(u)
            pool.discard(w)
    edge_points = {x for e in refixed_edges for x in e.endpoints}
    fixed_pts = [
        x for x in _fixed_points_on_closure(lam, fs, fi, k) if x not in edge_points
    ]
    refixed_vertices = tuple(sorted({view.angle(v) for v in pool} | set(fixed_pts)))

    if onto:
        pointwise = all(returned[v] == v for v in vset)
        kind = "identity-return" if pointwise else "finite"
        r = gap_degree(lam, start_gap)
    else:
        probes = [e.a for e in refixed_edges[:2]] + list(refixed_vertices[:2])
        r = _return_degree(lam, fs, fi, k, probes)
        r = max(r, gap_degree(lam, start_gap))
        kind = "siegel-suspect" if r == 1 else "fatou"
    return GapClass(
        status="periodic",
        kind=kind,
        period=k,
        preperiod=0,
        degree=r,
        refixed_edges=tuple(refixed_edges),
        refixed_vertices=refixed_vertices,
        orbit=(start_gap.vertices,),
    )


# ---------------------------------------------------------------------------
# boundary collapse map by itinerary coding


@dataclass(frozen=True, slots=True)
class CollapseMap:
    """Collapse of a degree-r gap boundary onto the circle map of degree r.

    Cuts the boundary at the return-map preimages of the refixed structure;
    digit j of the value of a vertex records which of the r resulting arcs
    holds its j-th return iterate.  The refixed edge goes to 0 and the map
    intertwines the return map with multiplication by r, exactly.
    """

    base_degree: int
    period: int
    degree: int
    refixed: Chord
    cuts: tuple  # (cw_end, ccw_end) angle pairs in ccw order, cut 0 = refixed
    values: tuple  # ((vertex, value) ...) for represented boundary vertices

    def value_map(self):
        return dict(self.values)

    def step(self, x: Fraction) -> Fraction:
        m = CircleMap(self.base_degree)
        for _ in range(self.period):
            x = map_angle(m, x)
        return x

    def __call__(self, x: Fraction) -> Fraction:
        if not self.cuts:
            return x % 1
        return _collapse_value(Fraction(x) % 1, self.cuts, self.step, self.degree)


def _cut_hit(x, cuts):
    """Cut index whose closed behind-arc (cw end to ccw end) holds x, else None.

    Every point of a cut collapses to the same value, so hitting a cut pins
    the remaining expansion exactly; this also resolves the two-expansion
    ambiguity at cut endpoints.
    """
    for j, (u, w) in enumerate(cuts):
        if x == u or x == w or (x - u) % 1 < (w - u) % 1:
            return j
    return None


def _arc_digit(x, cuts):
    """Index j with x in the arc from cut j's ccw end to cut j+1's cw end."""
    r = len(cuts)
    for j in range(r):
        w_j = cuts[j][1]
        u_next = cuts[(j + 1) % r][0]
        if (x - w_j) % 1 <= (u_next - w_j) % 1:
            return j
    raise IntegrityError(f"{x} escaped the cut decomposition")


def _prefix_value(digits, r):
    value = Fraction(0)
    for i, d in enumerate(digits):
        value += Fraction(d, r ** (i + 1))
    return value


def _collapse_value(x, cuts, step, r):
    """Exact collapse value of angle x: base-r expansion of its itinerary."""
    digits = []
    seen = {}
    cur = x
    while True:
        j = _cut_hit(cur, cuts)
        if j is not None:
            return (_prefix_value(digits, r) + Fraction(j, r) / r ** len(digits)) % 1
        if cur in seen:
            s = seen[cur]
            t = len(digits) - s
            cyc = digits[s:]
            c = 0
            for d in cyc:
                c = c * r + d
            value = _prefix_value(digits[:s], r)
            value += Fraction(c, (r**t - 1) * r**s)
            return value % 1
        digit = _arc_digit(cur, cuts)
        seen[cur] = len(digits)
        digits.append(digit)
        cur = step(cur)


def psi_collapse(lam: GeoLamination, gap: Gap, klass: GapClass = None) -> CollapseMap:
    """Build the boundary collapse map of a periodic degree-r gap, r >= 2.

    The refixed edge (or a refixed point when no non-degenerate edge
    returns) is sent to 0.  The other r-1 cuts are the return-map preimages
    of the refixed structure on the gap closure; when the depth leaves
    several candidates, the choice is settled by requiring the exact
    semiconjugacy with multiplication by r on all represented vertices.
    """
    if klass is None:
        klass = classify_gap(lam, gap)
    if klass.status != "periodic" or klass.degree < 2:
        raise DomainError(
            f"collapse map needs a periodic gap of degree >= 2, got "
            f"{klass.status}/{klass.kind} degree {klass.degree}"
        )
    k, r = klass.period, klass.degree
    m = CircleMap(lam.degree)

    def step(x):
        for _ in range(k):
            x = map_angle(m, x)
        return x

    if not gap.vertices:
        # the whole disk: the collapse is the identity, cut at the fixed point
        cuts = tuple((Fraction(i, r), Fraction(i, r)) for i in range(r))
        return CollapseMap(
            base_degree=lam.degree,
            period=k,
            degree=r,
            refixed=chord(0),
            cuts=cuts,
            values=(),
        )

    if klass.refixed_edges:
        refixed = klass.refixed_edges[0]
    elif klass.refixed_vertices:
        refixed = chord(klass.refixed_vertices[0])
    else:
        raise PartialMapError(
            "no refixed edge or point represented on the gap closure",
            unresolved=gap.vertices,
        )

    # walk order gives each boundary chord as (cw end, ccw end) wrt the gap
    directed = {}
    for kind, u, w in gap.segments:
        if kind == "chord":
            directed[frozenset((u, w))] = (u, w)
    ref_key = frozenset(refixed.endpoints)
    cut0 = (refixed.a, refixed.a) if refixed.degenerate else directed[ref_key]

    ref_set = set(refixed.endpoints)
    candidates = []
    for key, (u, w) in sorted(directed.items(), key=lambda kv: kv[1]):
        if key == ref_key and not refixed.degenerate:
            continue
        if {step(u), step(w)} <= ref_set:
            candidates.append((u, w))
    covered = {x for c in candidates for x in c} | set(cut0)
    for v in gap.vertices:
        if v not in covered and step(v) in ref_set:
            candidates.append((v, v))
            covered.add(v)
    for x in _iterate_preimages_on_closure(lam, gap, ref_set, k):
        if x not in covered:
            candidates.append((x, x))
            covered.add(x)

    need = r - 1
    if len(candidates) < need:
        raise PartialMapError(
            f"expected {r} return-map preimages of the refixed structure, "
            f"found {1 + len(candidates)}",
            unresolved=[c[0] for c in candidates],
        )

    base = cut0[1]
    verts = gap.vertices
    sample = verts[:: max(1, len(verts) // 64)]
    winners = []
    for combo in combinations(candidates, need):
        cuts = [cut0] + sorted(combo, key=lambda c: (c[1] - base) % 1)
        if _semiconjugate_on(sample, tuple(cuts), step, r):
            winners.append(tuple(cuts))
    if len(winners) != 1:
        raise PartialMapError(
            f"{len(winners)} cut systems satisfy the semiconjugacy at this depth",
            unresolved=[c[0] for c in candidates],
        )
    cuts = winners[0]
    values = tuple((v, _collapse_value(v, cuts, step, r)) for v in verts)
    return CollapseMap(
        base_degree=lam.degree,
        period=k,
        degree=r,
        refixed=refixed,
        cuts=cuts,
        values=values,
    )


def _iterate_preimages_on_closure(lam, gap, targets, k, cap=16):
    """Preimage angles of target points under the k-th iterate on the closure.

    Works per boundary arc with integer range arithmetic, so large periods
    stay cheap; at most `cap` points are returned.
    """
    mod = lam.modulus
    d = lam.degree
    dk = d**k
    big = dk * mod
    out = []
    arcs = []
    for kind, u, w in gap.segments:
        if kind == "chord":
            continue
        su = u.numerator * (mod // u.denominator)
        sw = w.numerator * (mod // w.denominator)
        arcs.append((su, sw))
    for p in sorted(targets):
        if mod % p.denominator:
            continue
        p_sc = p.numerator * (mod // p.denominator)
        for su, sw in arcs:
            span = (sw - su) % mod
            lo_num = su * dk - p_sc
            lo = -((-lo_num) // mod)
            hi = ((su + span) * dk - p_sc) // mod
            for j in range(lo, hi + 1):
                if len(out) >= cap:
                    return out
                num = (p_sc + j * mod) % big
                out.append(Fraction(num, big))
    return sorted(set(out))


def _semiconjugate_on(points, cuts, step, r):
    """Exact check of value(step(x)) == r * value(x) mod 1 over the points."""
    for x in points:
        vx = _collapse_value(x, cuts, step, r)
        vs = _collapse_value(step(x), cuts, step, r)
        if vs != (r * vx) % 1:
            return False
    return True


# ---------------------------------------------------------------------------
# lifting a quadratic gap through the collapse map


@dataclass(frozen=True, slots=True)
class LiftedGap:
    """Full collapse-preimage of a quadratic gap inside a degree-2 gap."""

    vertices: tuple  # ccw boundary sample inside the host gap
    refixed_edge: Chord  # lifted periodic edge, or None


def lift_gap(lam, gap, psi: CollapseMap, target_vertices, target_refixed=None):
    """Pull a degree-2 circle gap back into a fatou(2) gap of the lamination.

    `target_vertices` is the gap's vertex set in degree-2 angle coordinates;
    the lift keeps every represented host vertex whose collapse value lands
    in it.  When `target_refixed` (the target's own refixed chord) is given,
    the lifted periodic edge mapping onto it is identified and returned.
    """
    values = psi.value_map()
    missing = [v for v in gap.vertices if v not in values]
    if missing:
        raise PartialMapError("collapse map unresolved on host vertices", missing)
    target = {Fraction(t) % 1 for t in target_vertices}
    lifted = tuple(v for v in gap.vertices if values[v] in target)
    edge = None
    if target_refixed is not None:
        # the lifted edge's endpoints are periodic pinch points of the host
        # closure; they need not be represented vertices, so search the
        # period-N fixed points (N = host period * target vertex period)
        m2 = CircleMap(2)
        periods = [period_of(m2, x) for x in set(target_refixed.endpoints) if is_periodic(m2, x)]
        if not periods:
            raise DomainError("target refixed chord has no periodic endpoint")
        big_n = psi.period * max(periods)
        fs = face_structure(lam)
        fi = fs.find_face(gap)
        fixed = _fixed_points_on_closure(lam, fs, fi, big_n)
        want = sorted({Fraction(t) % 1 for t in target_refixed.endpoints})
        ends = []
        for t in want:
            hits = sorted(x for x in fixed if psi(x) == t)
            if not hits:
                raise PartialMapError(
                    f"no period-{big_n} point over collapse value {t} on the closure",
                    lifted,
                )
            ends.append(hits[0])
        if len(ends) == 1 or ends[0] == ends[-1]:
            raise PartialMapError("lifted refixed edge degenerated", ends)
        edge = chord(ends[0], ends[-1])
    return LiftedGap(vertices=lifted, refixed_edge=edge)


# ---------------------------------------------------------------------------
# taxonomy of the second critical set relative to a fixed critical leaf


@dataclass(frozen=True, slots=True)
class CriticalTaxonomy:
    """Which shape the remaining criticality takes, with its witness."""

    case: str  # '1' | '2a' | '2b' | '2c'
    witness_class: tuple  # angle tuple (case 1 / 2a leaf-class), else ()
    witness_gap: object  # Gap for 2a-gap / 2b / 2c, else None
    gap_class: object  # GapClass for the witness gap, else None
    siegel_flagged: bool = False


def hull_map_degree(vertices, degree):
    """Winding degree of the map on the hull of a finite circle set.

    Zero winding (all images equal) means the hull is all-critical and the
    degree is the vertex count.
    """
    verts = sorted(set(vertices))
    m = CircleMap(degree)
    images = [map_angle(m, v) for v in verts]
    winding = sum(
        (images[(i + 1) % len(images)] - images[i]) % 1 for i in range(len(images))
    )
    if winding == 0:
        return len(verts)
    return int(winding)


def critical_taxonomy(lam: GeoLamination, d_leaf: Chord) -> CriticalTaxonomy:
    """Locate and classify the critical structure away from the fixed leaf.

    Case 1: the chord-chain class of the leaf's endpoints already carries
    all the criticality (degree three).  Otherwise the second critical set
    is a finite class (2a), a periodic fatou(2) gap (2b), or a preperiodic
    infinite-at-depth gap falling onto a degree-one gap with the fixed leaf
    on its boundary (2c, flagged and excluded downstream).
    """
    if not lam.has_leaf(d_leaf):
        raise NotFoundError(f"{d_leaf} is not a leaf of the lamination")
    m = lam.map
    if not is_critical(m, d_leaf):
        raise DomainError(f"{d_leaf} is not critical for degree {lam.degree}")
    if is_periodic(m, d_leaf.a) or is_periodic(m, d_leaf.b):
        raise DomainError(f"{d_leaf} must have non-periodic endpoints")

    partition = endpoint_partition(lam)
    cls = partition.class_of(d_leaf.a)
    if hull_map_degree(cls, lam.degree) >= 3:
        return CriticalTaxonomy("1", tuple(cls), None, None)

    cls_set = set(cls)
    fs = face_structure(lam)
    view = fs.view

    candidates = []
    for fi in fs.face_indices():
        verts = fs.vertex_tuple(fi)
        if not verts or set(view.angle(v) for v in verts) <= cls_set:
            continue
        if len({view.image_point(v) for v in verts}) >= len(set(verts)):
            continue  # vertex images all distinct: degree one, skip cheaply
        g = fs.to_gap(fi)
        if gap_degree(lam, g) >= 2:
            candidates.append(g)
    d_pair = lam.to_pair(d_leaf)
    for p in lam.pairs:
        if p != d_pair and lam.is_critical_pair(p) and lam.angle(p[0]) not in cls_set:
            leaf_cls = partition.class_of(lam.angle(p[0]))
            candidates.append(("leaf-class", tuple(leaf_cls)))

    if not candidates:
        raise IntegrityError("no second critical set found at this depth")

    # prefer the description of the genuinely two-dimensional critical gap
    results = []
    for cand in candidates:
        if isinstance(cand, tuple) and cand[0] == "leaf-class":
            results.append(CriticalTaxonomy("2a", cand[1], None, None))
            continue
        klass = classify_gap(lam, cand)
        if klass.status == "periodic" and klass.kind == "fatou":
            results.append(CriticalTaxonomy("2b", (), cand, klass))
        elif klass.status == "preperiodic":
            target = klass.orbit[klass.preperiod]
            tgap = fs.to_gap(fs.find_face(target))
            tclass = classify_gap(lam, tgap)
            d_on_edge = d_leaf in tgap.edges
            if tclass.kind == "siegel-suspect" and d_on_edge:
                results.append(
                    CriticalTaxonomy("2c", (), cand, klass, siegel_flagged=True)
                )
            else:
                results.append(CriticalTaxonomy("2a", (), cand, klass))
        else:
            results.append(CriticalTaxonomy("2a", (), cand, klass))

    for case in ("2c", "2b", "2a"):
        for res in results:
            if res.case == case:
                return res
    raise IntegrityError("unclassifiable second critical set")
