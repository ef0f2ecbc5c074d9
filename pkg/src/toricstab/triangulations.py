"""Exhaustive enumeration of the triangulations of a point configuration.

A triangulation here is any set of full-dimensional simplices with vertices
in the configuration that cover its convex hull and meet face to face; points
may be left unused, and no regularity is required.

Enumeration grows a partial triangulation one simplex at a time.  It starts
with the simplex that contains a fixed generic interior point, then always
crosses the smallest open interior facet.  In any complete triangulation the
simplex behind that facet is unique, so every triangulation is produced
exactly once and no isomorph rejection is needed.

Two simplices meet properly iff no circuit ``(Z+, Z-)`` of the configuration
has ``Z+`` in one and ``Z-`` in the other; circuits are precomputed and
indexed by their positive part.
"""
from __future__ import annotations

from itertools import combinations

from ._exact import Fraction, det, nullspace
from .geometry import simplex_volume
from .hull import triangulate


def _sign(x):
    return (x > 0) - (x < 0)


class _Configuration:
    def __init__(self, points):
        self.points = [tuple(p) for p in points]
        self.N = len(self.points)
        self.n = len(self.points[0])
        self._orient = {}
        self._boundary = {}
        self._blocker_cache = {}
        self._neg_by_pos = self._circuits()

    def orient(self, facet, p) -> int:
        key = (facet, p)
        s = self._orient.get(key)
        if s is None:
            s = self._orient_point(facet, self.points[p])
            self._orient[key] = s
        return s

    def _orient_point(self, facet, x):
        f0 = self.points[facet[0]]
        rows = [[a - b for a, b in zip(self.points[f], f0)] for f in facet[1:]]
        rows.append([a - b for a, b in zip(x, f0)])
        return _sign(det(rows))

    def is_boundary(self, facet) -> bool:
        b = self._boundary.get(facet)
        if b is None:
            signs = {self.orient(facet, p) for p in range(self.N)} - {0}
            b = len(signs) <= 1
            self._boundary[facet] = b
        return b

    def _circuits(self):
        neg_by_pos = {}
        n = self.n
        for size in range(2, n + 3):
            for Z in combinations(range(self.N), size):
                cols = [self.points[z] + (1,) for z in Z]
                rows = [[cols[j][r] for j in range(size)] for r in range(n + 1)]
                ker = nullspace(rows)
                if len(ker) != 1 or any(c == 0 for c in ker[0]):
                    continue
                pos = sum(1 << z for z, c in zip(Z, ker[0]) if c > 0)
                neg = sum(1 << z for z, c in zip(Z, ker[0]) if c < 0)
                neg_by_pos.setdefault(pos, []).append(neg)
                neg_by_pos.setdefault(neg, []).append(pos)
        return neg_by_pos

    def _blockers(self, smask):
        """Negative parts of circuits whose positive part lies in the simplex."""
        cached = self._blocker_cache.get(smask)
        if cached is not None:
            return cached
        members = [b for b in range(self.N) if smask >> b & 1]
        out = []
        for r in range(1, len(members) + 1):
            for sub in combinations(members, r):
                out.extend(self._neg_by_pos.get(sum(1 << b for b in sub), ()))
        self._blocker_cache[smask] = out = tuple(out)
        return out

    def compatible(self, smask, tmask) -> bool:
        return not any(z & tmask == z for z in self._blockers(smask))

    def generic_point(self):
        n = self.n
        centroid = tuple(Fraction(sum(p[j] for p in self.points), self.N) for j in range(n))
        facets = [F for F in combinations(range(self.N), n)
                  if any(self.orient(F, p) for p in range(self.N))]
        for attempt in range(1, 1000):
            eps = Fraction(1, 1000 * attempt)
            x = tuple(c + eps * Fraction(1, (attempt + 2) ** j) for j, c in enumerate(centroid))
            if all(self._orient_point(F, x) != 0 for F in facets):
                return x
        raise RuntimeError("could not find a generic interior point")

    def starting_simplices(self, x):
        out = []
        for S in combinations(range(self.N), self.n + 1):
            ok = True
            for v in S:
                G = tuple(s for s in S if s != v)
                sv = self.orient(G, v)
                if sv == 0 or self._orient_point(G, x) != sv:
                    ok = False
                    break
            if ok:
                out.append(S)
        return out


def _mask(S):
    return sum(1 << s for s in S)


def all_triangulations(points):
    """All triangulations of a full-dimensional integer point configuration.

    Returns a sorted list; each triangulation is a sorted tuple of sorted
    index tuples (simplices of n+1 point indices).
    """
    cfg = _Configuration(points)
    results = []

    def grow(simplices, masks, open_facets):
        if not open_facets:
            results.append(tuple(sorted(simplices)))
            return
        F = min(open_facets)
        side = open_facets[F]
        for p in range(cfg.N):
            if p in F or cfg.orient(F, p) != -side:
                continue
            S = tuple(sorted(F + (p,)))
            smask = _mask(S)
            if not all(cfg.compatible(smask, t) for t in masks):
                continue
            new_open = dict(open_facets)
            del new_open[F]
            ok = True
            for v in S:
                if v == p:
                    continue
                G = tuple(s for s in S if s != v)
                if cfg.is_boundary(G):
                    continue
                gside = cfg.orient(G, v)
                if G in new_open:
                    if new_open[G] == -gside:
                        del new_open[G]
                    else:
                        ok = False
                        break
                else:
                    new_open[G] = gside
            if ok:
                grow(simplices + [S], masks + [smask], new_open)

    x0 = cfg.generic_point()
    for S in cfg.starting_simplices(x0):
        open_facets = {}
        for v in S:
            G = tuple(s for s in S if s != v)
            if not cfg.is_boundary(G):
                open_facets[G] = cfg.orient(G, v)
        grow([S], [_mask(S)], open_facets)
    return sorted(results)


def is_triangulation(points, simplices) -> bool:
    """Check that ``simplices`` triangulate the hull of ``points``.

    Non-degenerate simplices that pairwise meet properly and whose volumes
    add up to the hull volume cover the hull face to face.
    """
    cfg = _Configuration(points)
    n = cfg.n
    masks = []
    total = Fraction(0)
    for s in simplices:
        if len(s) != n + 1 or len(set(s)) != n + 1 or not all(0 <= j < cfg.N for j in s):
            return False
        vol = simplex_volume([cfg.points[j] for j in s])
        if vol == 0:
            return False
        total += vol
        masks.append(_mask(s))
    for a in range(len(masks)):
        for b in range(a + 1, len(masks)):
            if masks[a] == masks[b] or not cfg.compatible(masks[a], masks[b]):
                return False
    hull = sum((simplex_volume([cfg.points[j] for j in s]) for s in triangulate(cfg.points)),
               Fraction(0))
    return total == hull
