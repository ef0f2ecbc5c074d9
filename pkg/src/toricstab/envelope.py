"""Weight vectors and concave piecewise-linear functions on a Delzant polytope.

A weight vector assigns a rational to every point of the refined lattice
``A_i = poly meet (Z/i)^n``.  Its concave envelope is the least concave
majorant of the data, realised as the upper hull of the lifted points
``(a, phi(a))``.  The projected upper facets form the cells of a regular
subdivision; each cell carries the affine function of its facet, and
coplanar lifted points always merge into a single cell.

For a concave PL function every affine piece dominates the function on the
whole polytope, so evaluation is simply the minimum over the pieces.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import lcm

from ._exact import Fraction, as_rational, common_denominator, dot, fmt, solve
from .errors import DomainError, InputError
from .geometry import (
    DelzantPolytope,
    facet_simplex_measure,
    lattice_points,
    scaled_lattice_points,
    simplex_volume,
)
from .hull import affine_dimension, extreme_points, normal_through, triangulate


@dataclass(frozen=True)
class WeightVector:
    polytope: DelzantPolytope
    level: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(scaled_lattice_points(self.polytope, self.level))
        if len(self.values) != n:
            raise InputError(f"weight vector has {len(self.values)} values, A_{self.level} has {n} points")

    @property
    def points(self):
        return lattice_points(self.polytope, self.level)

    @classmethod
    def from_function(cls, poly, level, f):
        return cls(poly, level, tuple(as_rational(f(a)) for a in lattice_points(poly, level)))

    @classmethod
    def from_mapping(cls, poly, level, mapping):
        pts = lattice_points(poly, level)
        missing = [a for a in pts if a not in mapping]
        extra = set(mapping) - set(pts)
        if missing or extra:
            raise InputError(
                f"weight vector domain mismatch: {len(missing)} points missing, {len(extra)} not in A_{level}")
        return cls(poly, level, tuple(as_rational(mapping[a]) for a in pts))

    def __getitem__(self, point):
        return dict(zip(self.points, self.values))[tuple(Fraction(x) for x in point)]

    def pairing(self, other) -> Fraction:
        if (self.polytope, self.level) != (other.polytope, other.level):
            raise InputError("weight vectors live on different lattices")
        return sum((a * b for a, b in zip(self.values, other.values)), Fraction(0))

    def __add__(self, other):
        return WeightVector(self.polytope, self.level,
                            tuple(a + b for a, b in zip(self.values, other.values)))

    def scale(self, c):
        c = as_rational(c)
        return WeightVector(self.polytope, self.level, tuple(c * v for v in self.values))


@dataclass(frozen=True)
class AffineFunction:
    gradient: tuple[Fraction, ...]
    constant: Fraction

    def __call__(self, x):
        return dot(self.gradient, x) + self.constant

    def __neg__(self):
        return AffineFunction(tuple(-g for g in self.gradient), -self.constant)

    def __add__(self, other):
        return AffineFunction(tuple(a + b for a, b in zip(self.gradient, other.gradient)),
                              self.constant + other.constant)

    @classmethod
    def make(cls, gradient, constant=0):
        return cls(tuple(as_rational(g) for g in gradient), as_rational(constant))


@dataclass(frozen=True)
class Cell:
    vertices: tuple[tuple[Fraction, ...], ...]
    affine: AffineFunction


@dataclass(frozen=True)
class PLClassTag:
    level: int
    minimal_level: int
    in_pl: bool
    in_pl_q: bool


@dataclass(frozen=True)
class ConcavePL:
    """Concave piecewise-linear function given by a regular subdivision."""

    polytope: DelzantPolytope
    level: int
    cells: tuple[Cell, ...]
    data: WeightVector | None = None

    def __call__(self, x):
        return evaluate(self, x)

    @property
    def pieces(self):
        return tuple(c.affine for c in self.cells)

    @cached_property
    def _integer_pieces(self):
        d = common_denominator([x for p in self.pieces for x in p.gradient + (p.constant,)])
        return d, [(tuple(int(g * d) for g in p.gradient), int(p.constant * d)) for p in self.pieces]

    @cached_property
    def minimal_level(self) -> int:
        return common_denominator(x for c in self.cells for v in c.vertices for x in v)

    def __add__(self, affine: AffineFunction):
        cells = tuple(Cell(c.vertices, c.affine + affine) for c in self.cells)
        return ConcavePL(self.polytope, self.level, cells)


# ---------------------------------------------------------------------------
# construction


def concave_envelope(phi: WeightVector) -> ConcavePL:
    """Least concave majorant of ``phi``: the upper hull of the lifted points."""
    poly, i = phi.polytope, phi.level
    X = scaled_lattice_points(poly, i)
    D = common_denominator(phi.values)
    Z = [int(v * D) for v in phi.values]
    lifted = [x + (z,) for x, z in zip(X, Z)]
    n = poly.dimension
    planes = {}
    for idx in combinations(range(len(lifted)), n + 1):
        normal = normal_through([lifted[j] for j in idx])
        if normal is None or normal[-1] == 0:
            continue
        if normal[-1] < 0:
            normal = tuple(-a for a in normal)
        if normal in planes:
            continue
        off = dot(normal, lifted[idx[0]])
        if all(dot(normal, q) <= off for q in lifted):
            planes[normal] = off
    cells = []
    for normal, off in sorted(planes.items()):
        w, wz = normal[:-1], normal[-1]
        tight = [j for j, q in enumerate(lifted) if dot(normal, q) == off]
        pts = [tuple(Fraction(c, i) for c in X[j]) for j in tight]
        verts = tuple(sorted(pts[j] for j in extreme_points([X[t] for t in tight])))
        # z = (off - w.X) / wz with z = D phi and X = i a
        affine = AffineFunction(tuple(Fraction(-i * c, wz * D) for c in w), Fraction(off, wz * D))
        cells.append(Cell(verts, affine))
    return ConcavePL(poly, i, tuple(cells), phi)


def from_affine_min(poly: DelzantPolytope, pieces, level=None) -> ConcavePL:
    """The concave function ``min_j pieces[j]`` on ``poly``.

    Cells are found by exact vertex enumeration of ``{x in poly : l_j <= l_k}``.
    ``level`` defaults to the smallest i with every cell vertex in (Z/i)^n.
    """
    pieces = sorted(set(pieces), key=lambda p: (p.gradient, p.constant))
    n = poly.dimension
    cells = []
    for j, pj in enumerate(pieces):
        cons = [(tuple(Fraction(a) for a in f.normal), Fraction(f.offset)) for f in poly.facets]
        for k, pk in enumerate(pieces):
            if k != j:
                cons.append((tuple(a - b for a, b in zip(pj.gradient, pk.gradient)),
                             pk.constant - pj.constant))
        verts = set()
        for sub in combinations(cons, n):
            x = solve([c[0] for c in sub], [c[1] for c in sub])
            if x is None:
                continue
            if all(dot(a, x) <= b for a, b in cons):
                verts.add(x)
        verts = sorted(verts)
        if len(verts) > n and affine_dimension(verts) == n:
            cells.append(Cell(tuple(verts), pj))
    if not cells:
        raise InputError("no affine piece is minimal on a full-dimensional region")
    g = ConcavePL(poly, 1, tuple(cells))
    minimal = g.minimal_level
    if level is None:
        level = minimal
    elif level % minimal:
        raise InputError(f"function is not in PL(poly; {level}); its breakpoints need level {minimal}")
    return ConcavePL(poly, level, tuple(cells))


def affine(poly: DelzantPolytope, gradient, constant=0, level=1) -> ConcavePL:
    return from_affine_min(poly, [AffineFunction.make(gradient, constant)], level)


# ---------------------------------------------------------------------------
# evaluation and integration


def evaluate(g: ConcavePL, x) -> Fraction:
    x = tuple(as_rational(c) for c in x)
    if not g.polytope.contains(x):
        raise DomainError(f"point {[fmt(c) for c in x]} is outside the polytope")
    return min(p(x) for p in g.pieces)


def integral_dv(g: ConcavePL) -> Fraction:
    """Exact integral of g over the polytope."""
    total = Fraction(0)
    for cell in g.cells:
        for s in triangulate(cell.vertices):
            simplex = [cell.vertices[j] for j in s]
            mean = sum((cell.affine(v) for v in simplex), Fraction(0)) / len(simplex)
            total += simplex_volume(simplex) * mean
    return total


def boundary_integral(g: ConcavePL) -> Fraction:
    """Exact integral of g over the boundary against the lattice measure."""
    n = g.polytope.dimension
    total = Fraction(0)
    for f in g.polytope.facets:
        for cell in g.cells:
            on = [v for v in cell.vertices if f.contains(v)]
            if not on or affine_dimension(on) != n - 1:
                continue
            for s in triangulate(on):
                simplex = [on[j] for j in s]
                mean = sum((cell.affine(v) for v in simplex), Fraction(0)) / len(simplex)
                total += facet_simplex_measure(simplex, f.normal) * mean
    return total


def lattice_sum(g: ConcavePL, k: int) -> Fraction:
    """Sum of g over poly meet (Z/k)^n."""
    X = scaled_lattice_points(g.polytope, k)
    d, ipieces = g._integer_pieces
    # d * k * l(X / k) = G.X + C k, an integer for every piece
    total = 0
    for x in X:
        total += min(sum(a * b for a, b in zip(G, x)) + C * k for G, C in ipieces)
    return Fraction(total, d * k)


def classify(g: ConcavePL, level=None) -> PLClassTag:
    i = g.level if level is None else level
    m = g.minimal_level
    in_pl = i % m == 0
    return PLClassTag(i, m, in_pl, in_pl)


def restrict_to_level(g: ConcavePL, level: int) -> WeightVector:
    """Sample g on A_level."""
    return WeightVector.from_function(g.polytope, level, lambda a: min(p(a) for p in g.pieces))


def same_function(g: ConcavePL, h: ConcavePL) -> bool:
    """Exact equality as functions: compare on every cell vertex of both subdivisions."""
    pts = {v for c in g.cells + h.cells for v in c.vertices}
    return all(min(p(v) for p in g.pieces) == min(p(v) for p in h.pieces) for v in pts)


# ---------------------------------------------------------------------------
# serialisation


def weight_vector_to_json(phi: WeightVector):
    return {"level": phi.level,
            "values": [[fmt(x) for x in a] + [fmt(v)] for a, v in zip(phi.points, phi.values)]}


def weight_vector_from_json(poly: DelzantPolytope, data) -> WeightVector:
    try:
        level = int(data["level"])
        rows = data["values"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed weight vector: {exc}") from None
    n = poly.dimension
    mapping = {}
    for row in rows:
        if len(row) != n + 1:
            raise InputError(f"weight row {row!r} should have {n} coordinates and a value")
        a = tuple(as_rational(x) for x in row[:n])
        if a in mapping:
            raise InputError(f"duplicate weight for point {row[:n]!r}")
        mapping[a] = as_rational(row[n])
    return WeightVector.from_mapping(poly, level, mapping)


def concave_pl_to_json(g: ConcavePL):
    return {
        "level": g.level,
        "cells": [{"vertices": [[fmt(x) for x in v] for v in c.vertices],
                   "gradient": [fmt(x) for x in c.affine.gradient],
                   "constant": fmt(c.affine.constant)} for c in g.cells],
    }


def concave_pl_from_json(poly: DelzantPolytope, data) -> ConcavePL:
    try:
        pieces = [AffineFunction.make(c["gradient"], c["constant"]) for c in data["cells"]]
        level = data.get("level")
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed piecewise-linear function: {exc}") from None
    if any(len(p.gradient) != poly.dimension for p in pieces):
        raise InputError("gradient length does not match the polytope dimension")
    return from_affine_min(poly, pieces, None if level is None else int(level))
