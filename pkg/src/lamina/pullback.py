"""Iterated preimage construction of invariant laminations.

The circle is partitioned into d half-open sectors by d-1 pairwise-unlinked
critical cutting chords; every point then has exactly one preimage per
sector, so the d preimages of a leaf are the chords joining sector-wise
endpoint preimages.  One generation is one full preimage pass over the
newest leaves.  A build runs on integers scaled by a common modulus (base
denominator times degree^depth), so everything is exact and identical
inputs give bit-identical laminations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .circle import CircleMap, is_periodic
from .chords import Chord, chord, chord_image, is_critical, is_linked
from .errors import DomainError
from .lamination import GeoLamination

try:
    import numpy as _np
except ImportError:  # the pure-python path covers everything, just slower
    _np = None

TIE_BREAK = "half-open-ccw"


@dataclass(frozen=True, slots=True)
class PullbackPolicy:
    """Sector decomposition by critical cutting chords plus a tie-break tag.

    The tie break fixes the underdetermined choice of preimages at sector
    boundaries: each sector's circle support is half-open at its
    counterclockwise end, so every fiber point is claimed by exactly one
    sector.
    """

    degree: int
    cutting_chords: tuple
    tie_break: str = TIE_BREAK

    def __post_init__(self):
        d = self.degree
        cuts = self.cutting_chords
        if len(cuts) != d - 1:
            raise DomainError(f"need {d - 1} cutting chords for degree {d}, got {len(cuts)}")
        m = CircleMap(d)
        for c in cuts:
            if not is_critical(m, c):
                raise DomainError(f"cutting chord {c} is not critical")
        for i, c1 in enumerate(cuts):
            for c2 in cuts[i + 1 :]:
                if is_linked(c1, c2):
                    raise DomainError(f"cutting chords {c1} and {c2} cross")

    def sector_arcs(self):
        """Half-open (start, length, sector) support arcs partitioning [0,1).

        Sector i < d-1 sits behind cutting chord i (its side of length 1/d,
        which never holds another cutting chord's endpoint in its interior);
        the last sector takes the complement.
        """
        d = self.degree
        length = Fraction(1, d)
        arcs = []
        starts = []
        for i, c in enumerate(self.cutting_chords):
            start = c.a if (c.b - c.a) == length else c.b
            arcs.append((start, length, i))
            starts.append(start)
        starts.sort()
        for i, s in enumerate(starts):
            end = (s + length) % 1
            nxt = starts[(i + 1) % len(starts)]
            gap_len = (nxt - end) % 1
            if gap_len > 0:
                arcs.append((end, gap_len, d - 1))
        return arcs


def policy_for_cuts(degree, cutting_chords) -> PullbackPolicy:
    return PullbackPolicy(degree=degree, cutting_chords=tuple(sorted(cutting_chords)))


def forward_closure(chords, m: CircleMap):
    """Close a chord set under the image map (finite for rational angles)."""
    closed = set(chords)
    frontier = list(closed)
    while frontier:
        c = frontier.pop()
        img = chord_image(m, c)
        if img not in closed:
            closed.add(img)
            frontier.append(img)
    return closed


def chord_is_periodic(c: Chord, m: CircleMap) -> bool:
    """True iff the chord's forward orbit returns to the chord itself."""
    cur = chord_image(m, c)
    seen = set()
    while cur not in seen:
        if cur == c:
            return True
        seen.add(cur)
        cur = chord_image(m, cur)
    return False


def pullback_build(generators, m: CircleMap, depth: int, policy: PullbackPolicy) -> GeoLamination:
    """Forward-close the generators, then add `depth` preimage generations.

    Rejects generator sets that are linked among themselves or cross a
    cutting chord.  Pulled chords that duplicate existing leaves are merged
    silently; for unlinked generators the result is pairwise unlinked and
    forward-closed.
    """
    d = m.degree
    if policy.degree != d:
        raise DomainError("policy degree does not match the map")
    gens = forward_closure({c if isinstance(c, Chord) else chord(*c) for c in generators}, m)
    glist = sorted(gens)
    for i, c1 in enumerate(glist):
        for c2 in glist[i + 1 :]:
            if is_linked(c1, c2):
                raise DomainError(f"generators are linked: {c1} crosses {c2}")
    for c in glist:
        for cut in policy.cutting_chords:
            if is_linked(c, cut):
                raise DomainError(f"generator {c} crosses cutting chord {cut}")

    base = 1
    for c in glist:
        base = math.lcm(base, c.a.denominator, c.b.denominator)
    for c in policy.cutting_chords:
        base = math.lcm(base, c.a.denominator, c.b.denominator)
    modulus = base * d ** max(depth, 1)

    def scale(f: Fraction) -> int:
        return f.numerator * (modulus // f.denominator)

    arcs = []
    for s, l, sid in policy.sector_arcs():
        ln = l * modulus
        if ln.denominator != 1:
            raise DomainError("sector arcs do not align with the build modulus")
        arcs.append((scale(s), ln.numerator, sid))

    seed = {(scale(c.a), scale(c.b)) for c in glist}
    if _np is not None and modulus < (1 << 31):
        pairs = _generations_numpy(seed, d, depth, modulus, arcs)
    else:
        pairs = _generations_python(seed, d, depth, modulus, arcs)

    provenance = (
        ("generators", tuple(str(c) for c in glist)),
        ("policy", policy),
        ("depth", depth),
    )
    return GeoLamination(d, modulus, pairs, depth, provenance)


def _generations_python(seed, d, depth, modulus, arcs):
    def sector_preimages(x):
        out = [0] * d
        step = modulus // d
        y = x // d
        for j in range(d):
            cand = y + j * step
            for s, ln, sid in arcs:
                if (cand - s) % modulus < ln:
                    out[sid] = cand
                    break
        return out

    leaves = set(seed)
    frontier = sorted(leaves)
    for _ in range(depth):
        new = []
        pre_cache = {}
        for a, b in frontier:
            pa = pre_cache.get(a)
            if pa is None:
                pa = sector_preimages(a)
                pre_cache[a] = pa
            if a == b:
                pb = pa
            else:
                pb = pre_cache.get(b)
                if pb is None:
                    pb = sector_preimages(b)
                    pre_cache[b] = pb
            for j in range(d):
                x, y = pa[j], pb[j]
                pair = (x, y) if x <= y else (y, x)
                if pair not in leaves:
                    leaves.add(pair)
                    new.append(pair)
        new.sort()
        frontier = new
    return tuple(sorted(leaves))


def _generations_numpy(seed, d, depth, modulus, arcs):
    """Vectorized generation passes; bit-identical to the python path.

    Leaves are packed as a*modulus + b keys (safe: modulus < 2**31 keeps the
    key inside int64).  Sector lookup is a searchsorted over the half-open
    arc starts, with index -1 wrapping to the arc that crosses zero.
    """
    order = _np.argsort([s for s, _l, _sid in arcs])
    bounds = _np.array([arcs[i][0] for i in order], dtype=_np.int64)
    labels = _np.array([arcs[i][2] for i in order], dtype=_np.int64)
    step = modulus // d
    offsets = (_np.arange(d, dtype=_np.int64) * step)[None, :]

    existing = _np.array(
        sorted(a * modulus + b for a, b in seed), dtype=_np.int64
    )
    frontier = existing.copy()
    for _ in range(depth):
        fa, fb = frontier // modulus, frontier % modulus
        pts = _np.unique(_np.concatenate([fa, fb]))
        cand = (pts // d)[:, None] + offsets
        sec = labels[_np.searchsorted(bounds, cand, side="right") - 1]
        ordered = _np.empty_like(cand)
        _np.put_along_axis(ordered, sec, cand, axis=1)
        pa = ordered[_np.searchsorted(pts, fa)]
        pb = ordered[_np.searchsorted(pts, fb)]
        lo = _np.minimum(pa, pb)
        hi = _np.maximum(pa, pb)
        keys = _np.unique(lo * modulus + hi)
        pos = _np.searchsorted(existing, keys)
        pos[pos >= len(existing)] = len(existing) - 1
        fresh = keys[existing[pos] != keys]
        if fresh.size == 0:
            frontier = fresh
            break
        existing = _np.union1d(existing, fresh)
        frontier = fresh
    return tuple(
        (int(k) // modulus, int(k) % modulus) for k in existing
    )


def insert_cycle(lam: GeoLamination, cycle) -> GeoLamination:
    """Add a periodic leaf cycle and its preimages down to the build depth.

    Every cycle chord must be periodic (periodic endpoints, chord orbit
    closing) and must not cross existing leaves; preimage choices follow the
    sector policy recorded in the lamination's provenance.
    """
    cycle = [c if isinstance(c, Chord) else chord(*c) for c in cycle]
    if not cycle:
        return lam
    m = lam.map
    orbit = sorted(forward_closure(set(cycle), m))
    for c in orbit:
        if c.degenerate:
            continue
        if not (is_periodic(m, c.a) and is_periodic(m, c.b)) or not chord_is_periodic(c, m):
            raise DomainError(f"cycle chord {c} is not periodic")

    big = lam.modulus
    for c in orbit:
        big = math.lcm(big, c.a.denominator, c.b.denominator)
    factor = big // lam.modulus
    nondeg_cycle = [c for c in orbit if not c.degenerate]
    scaled_cycle = [
        (c.a.numerator * (big // c.a.denominator), c.b.numerator * (big // c.b.denominator))
        for c in nondeg_cycle
    ]
    for (x, y), c in zip(scaled_cycle, nondeg_cycle):
        for a, b in lam.pairs:
            a, b = a * factor, b * factor
            if a == b:
                continue
            if (a < x < b < y) or (x < a < y < b):
                raise DomainError(
                    f"cycle chord {c} crosses leaf "
                    f"{chord(Fraction(a, big), Fraction(b, big))}"
                )
    policy = lam.provenance_get("policy")
    if policy is None:
        raise DomainError("lamination provenance carries no pullback policy")
    addition = pullback_build(orbit, m, lam.depth, policy)
    factor_l = math.lcm(lam.modulus, addition.modulus)
    fl, fa = factor_l // lam.modulus, factor_l // addition.modulus
    merged = {(a * fl, b * fl) for a, b in lam.pairs}
    merged.update((a * fa, b * fa) for a, b in addition.pairs)
    return GeoLamination(
        lam.degree,
        factor_l,
        tuple(sorted(merged)),
        lam.depth,
        lam.provenance + (("inserted-cycle", tuple(str(c) for c in orbit)),),
    )
