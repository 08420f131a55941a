"""Gap extraction and gap dynamics: faces, degrees, classification, collapse maps.

Gaps are the closures of the components of the disk minus the union of the
non-degenerate leaves.  Extraction walks the rotational order of leaf ends
around each vertex (a half-edge traversal of the induced planar subdivision);
circle arcs between consecutive endpoint vertices bound the faces along the
circle.  All face bookkeeping runs on the integer-scaled view.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .circle import CircleMap
from .chords import Chord, chord
from .errors import DomainError, IntegrityError, NotFoundError, PartialMapError
from .lamination import GeoLamination, validate


@dataclass(frozen=True, slots=True)
class Gap:
    """One face: boundary vertices in counterclockwise order, boundary leaves.

    `segments` records the counterclockwise boundary walk as (kind, start,
    end) entries, kind "chord" or "arc".  `kind` is the cheap structural tag
    (finite / all-critical / disk); dynamical kinds come from classify_gap.
    """

    vertices: tuple
    edges: tuple
    segments: tuple
    kind: str

    @property
    def vertex_set(self):
        return frozenset(self.vertices)


@dataclass(frozen=True, slots=True)
class GapClass:
    """Dynamical classification of one gap under the induced face dynamics."""

    status: str  # 'periodic' | 'preperiodic' | 'collapsing'
    kind: str  # 'finite' | 'identity-return' | 'fatou' | 'siegel-suspect' | 'all-critical'
    period: int
    preperiod: int
    degree: int
    refixed_edges: tuple  # Chords fixed (with endpoints) by the return map
    refixed_vertices: tuple  # isolated return-map-fixed boundary vertices
    orbit: tuple  # the face orbit as vertex tuples (Fractions)


class FaceStructure:
    """Planar subdivision of the disk by the non-degenerate leaves."""

    def __init__(self, lam: GeoLamination):
        self.lamination = lam
        self.view = lam
        self._faces = []  # list of dicts with int-domain data
        self._face_of_directed = {}  # directed chord (u, w) -> face index
        self._build()

    # -- construction ------------------------------------------------------

    def _build(self):
        view = self.view
        chords = sorted({p for p in view.pairs if p[0] != p[1]})
        if not chords:
            self._faces.append({"verts": (), "edges": frozenset(), "segments": ()})
            return
        verts = sorted({x for p in chords for x in p})
        n = len(verts)
        index = {v: i for i, v in enumerate(verts)}
        mod = view.modulus

        # outgoing half-edges per vertex in ccw rotational order:
        # the ccw circle arc first, chords by circular offset, the cw arc last
        incident = {v: [] for v in verts}
        for u, w in chords:
            incident[u].append(w)
            incident[w].append(u)
        rotations = {}
        for v in verts:
            nxt = verts[(index[v] + 1) % n]
            prv = verts[(index[v] - 1) % n]
            ordered = sorted(incident[v], key=lambda w: (w - v) % mod)
            rot = [("arc+", nxt)] + [("chord", w) for w in ordered] + [("arc-", prv)]
            rotations[v] = rot
        position = {}
        for v, rot in rotations.items():
            for i, half in enumerate(rot):
                position[(v, half[0], half[1])] = i

        def reverse(v, kind, w):
            if kind == "chord":
                return (w, "chord", v)
            return (w, "arc-", v) if kind == "arc+" else (w, "arc+", v)

        def face_next(v, kind, w):
            # successor with the face kept on the left: rotate one step
            # clockwise from the reversed half-edge
            rv, rkind, rw = reverse(v, kind, w)
            rot = rotations[rv]
            i = position[(rv, rkind, rw)]
            nkind, nw = rot[(i - 1) % len(rot)]
            return (rv, nkind, nw)

        seen = set()
        for v in verts:
            for kind, w in rotations[v]:
                start = (v, kind, w)
                if start in seen:
                    continue
                cycle = []
                cur = start
                while cur not in seen:
                    seen.add(cur)
                    cycle.append(cur)
                    cur = face_next(*cur)
                if all(k == "arc-" for _, k, _w in cycle):
                    continue  # the unique outer face beyond the circle
                fverts = tuple(hv for hv, _k, _w in cycle)
                fedges = frozenset(
                    (min(hv, hw), max(hv, hw)) for hv, k, hw in cycle if k == "chord"
                )
                segments = tuple((k, hv, hw) for hv, k, hw in cycle)
                self._faces.append(
                    {"verts": fverts, "edges": fedges, "segments": segments}
                )
        for fi, face in enumerate(self._faces):
            for k, u, w in face["segments"]:
                if k == "chord":
                    self._face_of_directed[(u, w)] = fi

    # -- queries -----------------------------------------------------------

    def __len__(self):
        return len(self._faces)

    def face_indices(self):
        return range(len(self._faces))

    def vertex_tuple(self, fi):
        return self._faces[fi]["verts"]

    def edge_pairs(self, fi):
        return self._faces[fi]["edges"]

    def arcs(self, fi):
        return [
            (u, w) for k, u, w in self._faces[fi]["segments"] if k.startswith("arc")
        ]

    def face_with_vertices(self, scaled_verts):
        target = frozenset(scaled_verts)
        for fi, face in enumerate(self._faces):
            if frozenset(face["verts"]) == target:
                return fi
        return None

    def face_of_directed_chord(self, u, w):
        return self._face_of_directed.get((u, w))

    def image_face(self, fi):
        """Face containing the image of face fi, or None if it collapses.

        The image face sits left of the directed image of a boundary chord
        (the map preserves the walk orientation).  The longest non-collapsing
        boundary chord is used: structural gap edges dominate the fine
        truncation frontier, whose images may bound subdivision slivers
        rather than the image gap.
        """
        view = self.view
        mod = view.modulus
        best = None
        best_span = -1
        for k, u, w in self._faces[fi]["segments"]:
            if k != "chord":
                continue
            iu, iw = view.image_point(u), view.image_point(w)
            if iu == iw:
                continue
            span = min((w - u) % mod, (u - w) % mod)
            if span > best_span:
                best, best_span = (iu, iw), span
        if best is None:
            return None
        nxt = self._face_of_directed.get(best)
        if nxt is None:
            raise IntegrityError(
                "image leaf of a face boundary is not a face edge; "
                "lamination is not forward-closed enough for gap dynamics"
            )
        return nxt

    def to_gap(self, fi) -> Gap:
        view = self.view
        face = self._faces[fi]
        verts = face["verts"]
        if verts:
            k = min(range(len(verts)), key=lambda i: verts[i])
            verts = verts[k:] + verts[:k]
        edges = tuple(
            sorted(chord(view.angle(u), view.angle(w)) for u, w in face["edges"])
        )
        m = CircleMap(view.degree)
        if not verts:
            kind = "disk"
        elif edges and all(view.is_critical_pair(p) for p in face["edges"]):
            kind = "all-critical"
        else:
            kind = "finite"
        segments = tuple(
            (k, view.angle(u), view.angle(w)) for k, u, w in face["segments"]
        )
        return Gap(
            vertices=tuple(view.angle(v) for v in verts),
            edges=edges,
            segments=segments,
            kind=kind,
        )

    def find_face(self, gap_or_vertices):
        if isinstance(gap_or_vertices, Gap):
            verts = gap_or_vertices.vertices
        else:
            verts = tuple(gap_or_vertices)
        view = self.view
        scaled = [f.numerator * (view.modulus // f.denominator) for f in verts]
        fi = self.face_with_vertices(scaled)
        if fi is None:
            raise NotFoundError("no face with the given vertex set")
        return fi


@lru_cache(maxsize=8)
def face_structure(lam: GeoLamination) -> FaceStructure:
    return FaceStructure(lam)


def gaps(lam: GeoLamination) -> list:
    """All gaps of the lamination (pre: validate(lam) is empty)."""
    if validate(lam):
        raise DomainError("gaps() requires a valid lamination")
    fs = face_structure(lam)
    return sorted(
        (fs.to_gap(fi) for fi in fs.face_indices()),
        key=lambda g: g.vertices,
    )


# ---------------------------------------------------------------------------
# degree of the map on a gap


def gap_degree(lam: GeoLamination, gap: Gap) -> int:
    """Degree of the map on a gap, independent of the probe point.

    Degenerate image: the number of boundary vertices.  Otherwise, for each
    image vertex, the preimage points on the gap boundary are counted with
    points joined by a collapsing boundary edge merged into one component;
    all probes must agree.
    """
    fs = face_structure(lam)
    view = fs.view
    if not gap.vertices:
        return lam.degree
    fi = fs.find_face(gap)
    verts = fs.vertex_tuple(fi)
    images = {view.image_point(v) for v in verts}
    if len(images) == 1:
        return len(set(verts))
    d = lam.degree
    mod = view.modulus
    # fiber points generally live off the common grid; rescale by d so both
    # the fiber of x and the boundary data are integers over d*mod
    big = d * mod
    vset = {v * d for v in verts}
    arcs = [(u * d, w * d) for u, w in fs.arcs(fi)]
    edges = fs.edge_pairs(fi)
    counts = set()
    for x in sorted(images):
        fiber = [x + k * mod for k in range(d)]
        on_boundary = {
            y
            for y in fiber
            if y in vset or any((y - u) % big <= (w - u) % big for u, w in arcs)
        }
        # merge fiber points joined by a collapsing boundary edge
        merged = {y: y for y in on_boundary}

        def root(y):
            while merged[y] != y:
                y = merged[y]
            return y

        for u, w in edges:
            if view.image_point(u) == x and view.image_point(w) == x:
                yu, yw = u * d, w * d
                if yu in merged and yw in merged:
                    merged[root(yu)] = root(yw)
        counts.add(len({root(y) for y in on_boundary}))
    if len(counts) != 1:
        raise IntegrityError(f"probe-dependent gap degree: {sorted(counts)}")
    return counts.pop()
