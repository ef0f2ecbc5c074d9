"""Exact combinatorial convex-hull machinery for small point sets.

Points are tuples of ints or Fractions.  All routines return index sets into
the input list, so callers keep their own coordinates.  Algorithms are
brute force over d-subsets, which is the right trade-off for the desk-scale
configurations this package handles (tens of points, d <= 4).
"""
from __future__ import annotations

from itertools import combinations
from math import gcd
from functools import reduce

from ._exact import Fraction, common_denominator, det, rank, rref


def integer_points(points):
    """Scale rational points by one common factor so all coordinates are ints."""
    d = common_denominator(x for p in points for x in p)
    return [tuple(int(Fraction(x) * d) for x in p) for p in points]


def normal_through(points):
    """Primitive integer normal of the hyperplane through d integer points in Z^d.

    Returns ``None`` when the points are affinely dependent.
    """
    d = len(points[0])
    if d == 1:
        return (1,)
    p0 = points[0]
    m = [[a - b for a, b in zip(p, p0)] for p in points[1:]]
    comps = []
    for j in range(d):
        minor = [row[:j] + row[j + 1:] for row in m]
        comps.append((-1) ** j * det(minor))
    g = reduce(gcd, comps, 0)
    if g == 0:
        return None
    return tuple(c // g for c in comps)


def affine_dimension(points) -> int:
    if len(points) <= 1:
        return 0
    p0 = points[0]
    return rank([[a - b for a, b in zip(p, p0)] for p in points[1:]])


def affine_chart(points):
    """Project points onto coordinates that are injective on their affine hull.

    Returns (dimension, projected points).  The projection is an affine
    isomorphism of the hull, so faces and incidences are preserved.
    """
    if len(points) <= 1:
        return 0, [() for _ in points]
    p0 = points[0]
    _, pivots = rref([[a - b for a, b in zip(p, p0)] for p in points[1:]])
    return len(pivots), [tuple(p[j] for j in pivots) for p in points]


def hull_facets(points):
    """Facets of the convex hull of a full-dimensional integer point set in Z^d.

    Returns a sorted list of ``(normal, offset, on)`` with ``normal`` the
    primitive outward normal, ``offset`` the right-hand side of
    ``<normal, x> <= offset`` and ``on`` the sorted tuple of point indices on
    the facet.
    """
    d = len(points[0])
    found = {}
    for idx in combinations(range(len(points)), d):
        normal = normal_through([points[j] for j in idx])
        if normal is None:
            continue
        off = sum(a * b for a, b in zip(normal, points[idx[0]]))
        vals = [sum(a * b for a, b in zip(normal, p)) - off for p in points]
        if all(v <= 0 for v in vals):
            pass
        elif all(v >= 0 for v in vals):
            normal = tuple(-a for a in normal)
            off = -off
        else:
            continue
        on = tuple(j for j, v in enumerate(vals) if v == 0)
        found.setdefault(on, (normal, off))
    return sorted((normal, off, on) for on, (normal, off) in found.items())


def extreme_points(points):
    """Indices of the vertices of conv(points), for points in any affine subspace."""
    pts = integer_points(points)
    uniq = {}
    for j, p in enumerate(pts):
        uniq.setdefault(p, j)
    keys = sorted(uniq)
    dim, chart = affine_chart(keys)
    if dim == 0:
        return [uniq[keys[0]]]
    facets = hull_facets(chart)
    out = []
    for j, p in enumerate(keys):
        normals = [nv for nv, _, on in facets if j in on]
        if len(normals) >= dim and rank(normals) == dim:
            out.append(uniq[p])
    return sorted(out)


def triangulate(points):
    """Pulling triangulation (lexicographic apex) of conv(points).

    Returns simplices as sorted index tuples.  Works in the affine hull of the
    points, whatever its dimension; the simplices cover the hull exactly once.
    """
    pts = integer_points(points)
    uniq = {}
    for j, p in enumerate(pts):
        uniq.setdefault(p, j)
    idx = [uniq[p] for p in sorted(uniq)]
    return sorted(_pull(pts, idx))


def _pull(pts, idx):
    sub_pts = [pts[j] for j in idx]
    dim, chart = affine_chart(sub_pts)
    if dim == 0:
        return [(idx[0],)]
    if len(idx) == dim + 1:
        return [tuple(sorted(idx))]
    # lexicographic minimum in the ambient coordinates is always a vertex and
    # makes the recursion consistent across shared faces
    apex_local = min(range(len(idx)), key=lambda j: sub_pts[j])
    apex = idx[apex_local]
    out = []
    for _, _, on in hull_facets(chart):
        if apex_local in on:
            continue
        for s in _pull(pts, [idx[j] for j in on]):
            out.append(tuple(sorted(s + (apex,))))
    return out
