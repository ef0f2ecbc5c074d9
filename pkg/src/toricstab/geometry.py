"""Delzant polytopes and their exact invariants.

A :class:`DelzantPolytope` is built from integer vertices; its facets are
recovered by exact facet enumeration and stored with primitive outward
normals.  Volumes, the lattice boundary measure, moments up to degree two and
the Ehrhart polynomial are all computed in ``Fraction`` arithmetic.

The boundary measure on a facet ``{<nu, x> = c}`` with ``nu`` primitive is the
one for which ``d<nu, x> ^ dsigma`` is Lebesgue measure.  For an
``(n-1)``-simplex with edge vectors ``e_1..e_{n-1}`` inside the facet this is
``|det(e_1, ..., e_{n-1}, nu)| / ((n-1)! |nu|^2)``, which is rational.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product
from math import factorial, gcd
from functools import reduce

from ._exact import Fraction, as_rational, det, dot, fmt, rank
from .errors import DimensionError, InputError, InternalError, NotDelzantError
from .hull import affine_dimension, hull_facets, triangulate

Point = tuple  # tuple of ints or Fractions


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    offset: int
    vertex_ids: tuple[int, ...]

    def contains(self, x) -> bool:
        return dot(self.normal, x) == self.offset


@dataclass(frozen=True)
class Violation:
    condition: int
    vertex: tuple[int, ...]
    detail: str

    def __str__(self):
        return f"condition {self.condition} at vertex {self.vertex}: {self.detail}"

    def to_json(self):
        return {"condition": self.condition, "vertex": [str(x) for x in self.vertex],
                "detail": self.detail}


@dataclass(frozen=True)
class DelzantCheck:
    ok: bool
    violations: tuple[Violation, ...]
    dimension: int
    vertices: tuple[tuple[int, ...], ...]

    def to_json(self):
        return {
            "delzant": self.ok,
            "dimension": self.dimension,
            "vertices": [[str(x) for x in v] for v in self.vertices],
            "violations": [v.to_json() for v in self.violations],
        }


@dataclass(frozen=True)
class DelzantPolytope:
    """An integral Delzant polytope with both V- and H-representation."""

    vertices: tuple[tuple[int, ...], ...]
    facets: tuple[Facet, ...]
    edges: tuple[tuple[tuple[int, ...], ...], ...] = field(compare=False)

    @property
    def dimension(self) -> int:
        return len(self.vertices[0])

    @classmethod
    def from_vertices(cls, vertices) -> "DelzantPolytope":
        check, poly = _analyse(vertices)
        if not check.ok:
            raise NotDelzantError(check.violations)
        return poly

    def contains(self, x) -> bool:
        return all(dot(f.normal, x) <= f.offset for f in self.facets)

    def translate(self, shift) -> "DelzantPolytope":
        return DelzantPolytope.from_vertices(
            [tuple(a + b for a, b in zip(v, shift)) for v in self.vertices])

    def transform(self, matrix) -> "DelzantPolytope":
        """Image under x -> M x for an integer matrix M (rows)."""
        return DelzantPolytope.from_vertices(
            [tuple(dot(row, v) for row in matrix) for v in self.vertices])

    def __repr__(self):
        return f"DelzantPolytope(vertices={[list(v) for v in self.vertices]})"


def _parse_vertices(vertices):
    pts = []
    for v in vertices:
        coords = []
        for x in v:
            q = as_rational(x)
            if q.denominator != 1:
                raise InputError(f"vertex {list(map(str, v))} is not integral")
            coords.append(int(q))
        pts.append(tuple(coords))
    if not pts:
        raise InputError("empty vertex list")
    n = len(pts[0])
    if n == 0 or any(len(p) != n for p in pts):
        raise InputError("vertices must all have the same positive dimension")
    if len(set(pts)) != len(pts):
        raise InputError("duplicate vertices")
    return sorted(pts)


def _analyse(vertices):
    pts = _parse_vertices(vertices)
    n = len(pts[0])
    if affine_dimension(pts) != n:
        raise DimensionError(f"convex hull of the vertices is not {n}-dimensional")
    raw = hull_facets(pts)
    on_some = {j for _, _, on in raw for j in on}
    redundant = []
    for j, p in enumerate(pts):
        normals = [nv for nv, _, on in raw if j in on]
        if j not in on_some or rank(normals) < n:
            redundant.append(p)
    if redundant:
        raise InputError(f"points {[list(p) for p in redundant]} are not vertices of the hull")
    facets = tuple(Facet(nv, off, on) for nv, off, on in raw)
    incident = [[f for f in facets if j in f.vertex_ids] for j in range(len(pts))]

    violations = []
    edges = []
    for j, v in enumerate(pts):
        dirs = []
        for k, u in enumerate(pts):
            if k == j:
                continue
            common = [f.normal for f in incident[j] if k in f.vertex_ids]
            if (rank(common) if common else 0) == n - 1:
                d = tuple(a - b for a, b in zip(u, v))
                g = reduce(gcd, d, 0)
                dirs.append(tuple(x // g for x in d))
        dirs.sort()
        edges.append(tuple(dirs))
        if len(dirs) != n:
            violations.append(Violation(2, v, f"{len(dirs)} edges emanate, expected {n}"))
            continue
        dt = det([list(e) for e in dirs])
        if abs(dt) != 1:
            violations.append(Violation(
                3, v, f"primitive edge vectors {[list(e) for e in dirs]} have determinant {dt}"))
    poly = DelzantPolytope(tuple(pts), facets, tuple(edges))
    check = DelzantCheck(not violations, tuple(violations), n, tuple(pts))
    return check, poly


def verify_delzant(vertices) -> DelzantCheck:
    """Check the three Delzant conditions for the hull of integer ``vertices``.

    Integrality (condition 1) is enforced at parse time; a fractional vertex
    raises :class:`InputError`.  Conditions 2 and 3 are reported per vertex.
    """
    return _analyse(vertices)[0]


# ---------------------------------------------------------------------------
# lattice points


@lru_cache(maxsize=256)
def scaled_lattice_points(poly: DelzantPolytope, i: int):
    """Integer points of ``i * poly`` in lexicographic order."""
    if not isinstance(i, int) or isinstance(i, bool) or i <= 0:
        raise InputError(f"level must be a positive integer, got {i!r}")
    n = poly.dimension
    lo = [i * min(v[j] for v in poly.vertices) for j in range(n)]
    hi = [i * max(v[j] for v in poly.vertices) for j in range(n)]
    cons = [(f.normal, i * f.offset) for f in poly.facets]
    out = []
    for x in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if all(sum(a * b for a, b in zip(nv, x)) <= c for nv, c in cons):
            out.append(x)
    return tuple(out)


def lattice_points(poly: DelzantPolytope, i: int):
    """The points of ``poly`` meet ``(Z/i)^n``, as Fraction tuples, lexicographic."""
    return tuple(tuple(Fraction(x, i) for x in p) for p in scaled_lattice_points(poly, i))


def count_lattice_points(poly: DelzantPolytope, i: int) -> int:
    return len(scaled_lattice_points(poly, i))


# ---------------------------------------------------------------------------
# volumes


def simplex_volume(simplex) -> Fraction:
    """Euclidean volume of a full-dimensional simplex given by n+1 points."""
    p0 = simplex[0]
    n = len(p0)
    return Fraction(abs(det([[a - b for a, b in zip(p, p0)] for p in simplex[1:]])),
                    factorial(n))


def facet_simplex_measure(simplex, normal) -> Fraction:
    """Boundary measure of an (n-1)-simplex lying in a hyperplane with primitive ``normal``."""
    p0 = simplex[0]
    n = len(p0)
    rows = [[a - b for a, b in zip(p, p0)] for p in simplex[1:]] + [list(normal)]
    return Fraction(abs(det(rows)), factorial(n - 1) * dot(normal, normal))


@lru_cache(maxsize=256)
def _vertex_triangulation(poly):
    return tuple(tuple(poly.vertices[j] for j in s) for s in triangulate(poly.vertices))


@lru_cache(maxsize=256)
def _facet_triangulations(poly):
    out = []
    for f in poly.facets:
        pts = [poly.vertices[j] for j in f.vertex_ids]
        out.append(tuple(tuple(pts[j] for j in s) for s in triangulate(pts)))
    return tuple(out)


def volume(poly: DelzantPolytope) -> Fraction:
    return sum((simplex_volume(s) for s in _vertex_triangulation(poly)), Fraction(0))


def facet_measures(poly: DelzantPolytope):
    """Boundary measure of every facet, aligned with ``poly.facets``."""
    return tuple(
        sum((facet_simplex_measure(s, f.normal) for s in tris), Fraction(0))
        for f, tris in zip(poly.facets, _facet_triangulations(poly)))


def boundary_volume(poly: DelzantPolytope):
    """Total boundary measure and the per-facet table ``((facet, measure), ...)``."""
    table = tuple(zip(poly.facets, facet_measures(poly)))
    return sum((m for _, m in table), Fraction(0)), table


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class MomentTable:
    vol: Fraction
    first: tuple[Fraction, ...]
    second: tuple[tuple[Fraction, ...], ...]
    bvol: Fraction
    bfirst: tuple[Fraction, ...]

    def gram(self):
        """Gram matrix of the basis (1, x_1, ..., x_n) in L^2(poly, dv)."""
        n = len(self.first)
        rows = [[self.vol] + list(self.first)]
        for j in range(n):
            rows.append([self.first[j]] + list(self.second[j]))
        return rows

    @property
    def barycenter(self):
        return tuple(m / self.vol for m in self.first)


def _simplex_moments(s):
    n = len(s[0])
    vol = simplex_volume(s)
    sums = [sum(p[j] for p in s) for j in range(n)]
    first = [vol * sums[j] / (n + 1) for j in range(n)]
    second = [[vol * (sum(p[j] * p[k] for p in s) + sums[j] * sums[k]) / ((n + 1) * (n + 2))
               for k in range(n)] for j in range(n)]
    return vol, first, second


@lru_cache(maxsize=256)
def moments(poly: DelzantPolytope) -> MomentTable:
    """Exact integrals of 1, x_j, x_j x_k over the polytope and of 1, x_j over its boundary."""
    n = poly.dimension
    vol = Fraction(0)
    first = [Fraction(0)] * n
    second = [[Fraction(0)] * n for _ in range(n)]
    for s in _vertex_triangulation(poly):
        v, f1, f2 = _simplex_moments(s)
        vol += v
        for j in range(n):
            first[j] += f1[j]
            for k in range(n):
                second[j][k] += f2[j][k]
    bvol = Fraction(0)
    bfirst = [Fraction(0)] * n
    for f, tris in zip(poly.facets, _facet_triangulations(poly)):
        for s in tris:
            m = facet_simplex_measure(s, f.normal)
            bvol += m
            for j in range(n):
                bfirst[j] += m * sum(p[j] for p in s) / len(s)
    return MomentTable(vol, tuple(first), tuple(tuple(r) for r in second), bvol, tuple(bfirst))


# ---------------------------------------------------------------------------
# Ehrhart polynomial


@dataclass(frozen=True)
class EhrhartPolynomial:
    coefficients: tuple[Fraction, ...]  # c_0 .. c_n

    def __call__(self, t):
        t = Fraction(t)
        return sum((c * t ** k for k, c in enumerate(self.coefficients)), Fraction(0))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __str__(self):
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coefficients[k]
            if c == 0:
                continue
            mag = abs(c)
            if k == 0:
                body = fmt(mag)
            else:
                mono = "t" if k == 1 else f"t^{k}"
                body = mono if mag == 1 else f"{fmt(mag)} {mono}"
            if not terms:
                terms.append(body if c > 0 else f"-{body}")
            else:
                terms.append(("+ " if c > 0 else "- ") + body)
        return " ".join(terms) if terms else "0"


def _interpolate(xs, ys):
    """Coefficients (low to high) of the Lagrange interpolant through (xs, ys)."""
    n = len(xs)
    coeffs = [Fraction(0)] * n
    for j in range(n):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for m in range(n):
            if m == j:
                continue
            basis = [Fraction(0)] + basis  # multiply by t
            for k in range(len(basis) - 1):
                basis[k] -= xs[m] * basis[k + 1]
            denom *= xs[j] - xs[m]
        for k in range(n):
            coeffs[k] += ys[j] * basis[k] / denom
    return coeffs


@lru_cache(maxsize=256)
def ehrhart(poly: DelzantPolytope) -> EhrhartPolynomial:
    n = poly.dimension
    xs = list(range(n + 1))
    ys = [1] + [count_lattice_points(poly, t) for t in range(1, n + 1)]
    e = EhrhartPolynomial(tuple(_interpolate(xs, ys)))
    if e(n + 1) != count_lattice_points(poly, n + 1):
        raise InternalError("Ehrhart interpolation disagrees with a direct count at t = n+1")
    bvol, _ = boundary_volume(poly)
    if e.coefficients[n] != volume(poly) or e.coefficients[n - 1] != bvol / 2:
        raise InternalError("Ehrhart leading coefficients disagree with volume / boundary volume")
    return e


# ---------------------------------------------------------------------------
# serialisation


def vertices_from_json(data):
    """Vertex list of ``{"dimension": n, "vertices": [["0", "0"], ...]}``."""
    if not isinstance(data, dict) or "vertices" not in data:
        raise InputError("polytope JSON needs a 'vertices' list")
    verts = data["vertices"]
    if not isinstance(verts, list) or not all(isinstance(v, list) for v in verts):
        raise InputError("'vertices' must be a list of coordinate lists")
    dim = data.get("dimension")
    if dim is not None and any(len(v) != dim for v in verts):
        raise InputError(f"vertex length does not match dimension {dim}")
    for v in verts:
        for x in v:
            if isinstance(x, bool) or not isinstance(x, (int, str)):
                raise InputError(f"coordinate {x!r} must be an integer or a decimal string")
    return [tuple(as_rational(x) for x in v) for v in verts]


def polytope_from_json(data) -> DelzantPolytope:
    return DelzantPolytope.from_vertices(vertices_from_json(data))


def polytope_to_json(poly: DelzantPolytope):
    return {"dimension": poly.dimension,
            "vertices": [[str(x) for x in v] for v in poly.vertices]}
