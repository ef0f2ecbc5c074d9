"""Torus Chow semistability of a polarized toric manifold at a fixed level.

At level ``i`` the Chow polytope ``Ch`` is the convex hull of the weight
vectors ``psi_T`` of the triangulations ``T`` of ``A_i``, where ``psi_T(a)`` is
the total normalised volume (``n!`` times Euclidean, measured in ``i * poly``)
of the simplices of ``T`` having ``a`` as a vertex.  The pair is semistable
for the diagonal torus iff the constant vector

    c(a) = i^n (n+1)! vol(poly) / E(i)

lies in ``Ch``.  Membership is one exact LP.  Its columns come either from a
full enumeration of triangulations or by column generation: for a Farkas
direction ``phi`` the best column is any triangulation refining the upper-hull
subdivision of ``phi``, and its value equals ``(n+1)! i^n`` times the
integral of the concave envelope ``g_phi``.  A final Farkas direction is
therefore a destabilising weight vector with ``P(i; g_phi) < 0``.
"""
from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from math import factorial

from ._exact import Fraction, as_rational, fmt, rank
from .envelope import (
    ConcavePL,
    WeightVector,
    classify,
    concave_envelope,
    concave_pl_to_json,
    integral_dv,
    lattice_sum,
    weight_vector_to_json,
)
from .errors import InputError, InternalError, ResourceError
from .geometry import (
    DelzantPolytope,
    count_lattice_points,
    lattice_points,
    moments,
    scaled_lattice_points,
    simplex_volume,
    volume,
)
from .hull import triangulate
from .lp import linprog_eq
from .triangulations import all_triangulations, is_triangulation

DEFAULT_CAP = 16
ENUMERATION_LIMIT = 10  # "auto" enumerates up to this many points, then generates columns

SEMISTABLE = "semistable"
UNSTABLE = "unstable"
INCONCLUSIVE = "inconclusive"


def default_cap() -> int:
    env = os.environ.get("TORICSTAB_CAP")
    if env is None:
        return DEFAULT_CAP
    try:
        cap = int(env)
    except ValueError:
        raise InputError(f"TORICSTAB_CAP must be an integer, got {env!r}") from None
    if cap <= 0:
        raise InputError("TORICSTAB_CAP must be positive")
    return cap


# ---------------------------------------------------------------------------
# functionals


def stability_functional(poly: DelzantPolytope, i: int, g: ConcavePL) -> Fraction:
    """P(i; g) = E(i) * int g dv - vol * sum of g over A_i."""
    if g.polytope != poly:
        raise InputError("function is defined on a different polytope")
    if not classify(g, i).in_pl:
        raise InputError(f"function needs level {g.minimal_level}, which does not divide {i}")
    return count_lattice_points(poly, i) * integral_dv(g) - volume(poly) * lattice_sum(g, i)


def surrogate_functional(phi: WeightVector, weights=None) -> Fraction:
    """E(i) * int g_phi dv - vol * sum_a w(a) phi(a), with w = 1 by default.

    Convex and positively homogeneous in ``phi``; bounds ``P(i; g_phi)`` from
    above because g_phi >= phi on A_i.
    """
    poly, i = phi.polytope, phi.level
    g = concave_envelope(phi)
    if weights is None:
        s = sum(phi.values, Fraction(0))
    else:
        s = sum((w * v for w, v in zip(weights, phi.values)), Fraction(0))
    return count_lattice_points(poly, i) * integral_dv(g) - volume(poly) * s


def linear_obstruction(poly: DelzantPolytope, i: int):
    """Residual sum_a a - (E(i)/vol) int x dv; zero is necessary for semistability."""
    pts = lattice_points(poly, i)
    n = poly.dimension
    e = count_lattice_points(poly, i)
    mom = moments(poly)
    return tuple(sum((a[j] for a in pts), Fraction(0)) - e * mom.first[j] / mom.vol
                 for j in range(n))


def target_scale(poly: DelzantPolytope, i: int) -> Fraction:
    n = poly.dimension
    return Fraction(i ** n * factorial(n + 1)) * volume(poly) / count_lattice_points(poly, i)


# ---------------------------------------------------------------------------
# triangulations and their weights


@dataclass(frozen=True)
class Triangulation:
    polytope: DelzantPolytope
    level: int
    simplices: tuple[tuple[int, ...], ...]  # indices into lattice_points(polytope, level)

    @property
    def points(self):
        return lattice_points(self.polytope, self.level)

    def validate(self):
        X = scaled_lattice_points(self.polytope, self.level)
        if not is_triangulation(X, self.simplices):
            raise InputError("simplices do not form a triangulation of the polytope")

    def to_json(self):
        return [list(s) for s in self.simplices]


def chow_weight(T: Triangulation, check=True) -> WeightVector:
    """psi_T(a) = sum over simplices containing a of n! vol(simplex in i*poly)."""
    poly, i = T.polytope, T.level
    X = scaled_lattice_points(poly, i)
    n = poly.dimension
    psi = [0] * len(X)
    for s in T.simplices:
        nv = simplex_volume([X[j] for j in s]) * factorial(n)
        if nv == 0:
            raise InputError(f"simplex {s} is degenerate")
        for j in s:
            psi[j] += nv
    w = WeightVector(poly, i, tuple(Fraction(v) for v in psi))
    if check:
        _check_affine_hull(w)
    return w


def _check_affine_hull(w: WeightVector):
    poly, i = w.polytope, w.level
    n = poly.dimension
    mom = moments(poly)
    total = sum(w.values, Fraction(0))
    if total != factorial(n + 1) * i ** n * mom.vol:
        raise InputError("weight total differs from (n+1)! vol(i poly): not a triangulation")
    for j in range(n):
        lhs = sum((i * v * a[j] for v, a in zip(w.values, w.points)), Fraction(0))
        if lhs != factorial(n + 1) * i ** (n + 1) * mom.first[j]:
            raise InputError("weighted point sum differs from (n+1)! int x dv over i poly")


def enumerate_triangulations(poly: DelzantPolytope, i: int, cap=None):
    """Every triangulation of A_i (points may be unused), in canonical order."""
    cap = default_cap() if cap is None else cap
    X = scaled_lattice_points(poly, i)
    if len(X) > cap:
        raise ResourceError(
            f"A_{i} has {len(X)} points, above the enumeration cap {cap}; "
            "raise the cap or use destabilizer_search")
    return [Triangulation(poly, i, t) for t in all_triangulations(X)]


def envelope_triangulation(phi: WeightVector) -> Triangulation:
    """A triangulation refining the upper-hull subdivision of ``phi``.

    Each cell is pulled in the global lexicographic order using all lifted
    points on its facet, which keeps neighbouring cells face to face.  Its
    weight maximises ``(phi, psi_T)`` over all triangulations.
    """
    poly, i = phi.polytope, phi.level
    X = scaled_lattice_points(poly, i)
    g = concave_envelope(phi)
    simplices = set()
    for cell in g.cells:
        tight = [j for j, (a, v) in enumerate(zip(lattice_points(poly, i), phi.values))
                 if cell.affine(a) == v]
        for s in triangulate([X[j] for j in tight]):
            simplices.add(tuple(sorted(tight[k] for k in s)))
    return Triangulation(poly, i, tuple(sorted(simplices)))


# ---------------------------------------------------------------------------
# certificates and reports


@dataclass(frozen=True)
class ConvexCertificate:
    coefficients: tuple[Fraction, ...]
    triangulations: tuple[Triangulation, ...]

    def verify(self, target) -> bool:
        if any(c < 0 for c in self.coefficients) or sum(self.coefficients) != 1:
            return False
        acc = [Fraction(0)] * len(target)
        for c, T in zip(self.coefficients, self.triangulations):
            T.validate()
            psi = chow_weight(T)
            for k, v in enumerate(psi.values):
                acc[k] += c * v
        return tuple(acc) == tuple(target)

    def to_json(self):
        return {
            "type": "convex_combination",
            "terms": [{"coefficient": fmt(c), "simplices": T.to_json(),
                       "weight": [fmt(v) for v in chow_weight(T, check=False).values]}
                      for c, T in zip(self.coefficients, self.triangulations)],
        }


@dataclass(frozen=True)
class Destabilizer:
    """A weight vector whose envelope violates the stability inequality.

    ``value`` is ``E(i) int g dv - vol * sum_a w(a) g(a)`` and ``surrogate`` the
    same with ``phi(a)`` in place of ``g(a)``; ``w`` is 1 for plain Chow and
    ``1 - theta(a)/(2i)`` for the relative version.
    """

    phi: WeightVector
    g: ConcavePL
    value: Fraction
    surrogate: Fraction
    weights: tuple[Fraction, ...] | None = None

    @classmethod
    def build(cls, phi: WeightVector, weights=None):
        poly, i = phi.polytope, phi.level
        g = concave_envelope(phi)
        e = count_lattice_points(poly, i)
        vol = volume(poly)
        integral = integral_dv(g)
        gvals = [min(p(a) for p in g.pieces) for a in phi.points]
        w = weights if weights is not None else [Fraction(1)] * len(gvals)
        value = e * integral - vol * sum((x * y for x, y in zip(w, gvals)), Fraction(0))
        surrogate = e * integral - vol * sum((x * y for x, y in zip(w, phi.values)), Fraction(0))
        return cls(phi, g, value, surrogate, None if weights is None else tuple(weights))

    def verify(self) -> bool:
        again = Destabilizer.build(self.phi, self.weights)
        if (again.value, again.surrogate) != (self.value, self.surrogate):
            return False
        # plain: P(i; g_phi) < 0; relative: the separating phi-form inequality
        return self.value < 0 if self.weights is None else self.surrogate < 0

    def to_json(self):
        return {
            "type": "destabilizer",
            "phi": weight_vector_to_json(self.phi),
            "envelope": concave_pl_to_json(self.g),
            "functional": fmt(self.value),
            "surrogate": fmt(self.surrogate),
        }


@dataclass(frozen=True)
class StabilityReport:
    verdict: str
    polytope: DelzantPolytope
    level: int
    target: tuple[Fraction, ...]
    certificate: ConvexCertificate | Destabilizer | None
    residual: tuple[Fraction, ...]
    boundary: bool | None
    method: str
    relative: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False, hash=False)

    def verify(self) -> bool:
        if isinstance(self.certificate, ConvexCertificate):
            return self.verdict == SEMISTABLE and self.certificate.verify(self.target)
        if isinstance(self.certificate, Destabilizer):
            return self.verdict == UNSTABLE and self.certificate.verify()
        return self.verdict == INCONCLUSIVE

    def to_json(self):
        return {
            "verdict": self.verdict,
            "relative": self.relative,
            "level": self.level,
            "method": self.method,
            "points": [[fmt(x) for x in a] for a in lattice_points(self.polytope, self.level)],
            "target": [fmt(v) for v in self.target],
            "obstruction_residual": [fmt(v) for v in self.residual],
            "boundary": self.boundary,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "diagnostics": self.diagnostics,
        }


# ---------------------------------------------------------------------------
# the decision


def _lp_rows(columns, target):
    N = len(target)
    A = [[col[k] for col in columns] for k in range(N)]
    A.append([1] * len(columns))
    return A, list(target) + [1]


def decide_membership(poly, i, target, cap=None, method=None, relative=False):
    """Decide whether ``target`` lies in the Chow polytope at level ``i``.

    A separating direction ``phi`` violates the inequality
    ``E(i) int g_phi dv < vol * sum_a w(a) phi(a)`` with ``w = target / c``.
    """
    cap = default_cap() if cap is None else cap
    X = scaled_lattice_points(poly, i)
    N = len(X)
    if len(target) != N:
        raise InputError(f"target has {len(target)} entries, A_{i} has {N} points")
    target = [as_rational(v) for v in target]
    scale = target_scale(poly, i)
    weights = None if all(v == scale for v in target) else tuple(v / scale for v in target)
    if N > cap:
        raise ResourceError(
            f"A_{i} has {N} points, above the cap {cap}; raise the cap or use destabilizer_search")
    if method in (None, "auto"):
        method = "enumerate" if N <= ENUMERATION_LIMIT else "generate"
    if method not in ("enumerate", "generate"):
        raise InputError(f"unknown method {method!r}")
    n = poly.dimension
    chow_dim = N - n - 1

    columns, owners = [], []
    seen = {}

    def add(T):
        psi = chow_weight(T).values
        if psi in seen:
            return False
        seen[psi] = len(columns)
        columns.append(psi)
        owners.append(T)
        return True

    diagnostics = {"points": N}
    if method == "enumerate":
        tris = enumerate_triangulations(poly, i, cap)
        for T in tris:
            add(T)
        diagnostics["triangulations"] = len(tris)
    else:
        pts = lattice_points(poly, i)
        seeds = [WeightVector(poly, i, tuple(Fraction(0) for _ in pts)),
                 WeightVector(poly, i, tuple(-sum(x * x for x in a) for a in pts))]
        for j in range(n):
            for s in (1, -1):
                seeds.append(WeightVector(poly, i, tuple(s * a[j] * a[j] for a in pts)))
        for phi in seeds:
            add(envelope_triangulation(phi))

    rounds = 0
    while True:
        rounds += 1
        A, b = _lp_rows(columns, target)
        res = linprog_eq(None, A, b, feasibility_only=True)
        if res.status == "optimal":
            break
        y = res.farkas
        phi = WeightVector(poly, i, tuple(y[:N]))
        bound = -y[N]  # max over current columns of (phi, psi) is <= bound < (phi, target)
        if method == "enumerate":
            break
        T = envelope_triangulation(phi)
        best = sum((p * v for p, v in zip(phi.values, chow_weight(T).values)), Fraction(0))
        if best <= bound:
            break
        if not add(T):
            raise InternalError("column generation produced a repeated column")

    diagnostics["distinct_weights"] = len(columns)
    diagnostics["lp_rounds"] = rounds
    residual = linear_obstruction(poly, i)
    if res.status == "optimal":
        used = [(x, owners[k]) for k, x in enumerate(res.x) if x != 0]
        cert = ConvexCertificate(tuple(x for x, _ in used), tuple(T for _, T in used))
        full = method == "enumerate"
        flag = _interior_flag(columns, target, full, chow_dim)
        if flag is None:
            flag = _search_interior(poly, i, add, columns, target, chow_dim)
        diagnostics["distinct_weights"] = len(columns)
        report = StabilityReport(SEMISTABLE, poly, i, tuple(target), cert, residual, flag,
                                 method, relative, diagnostics)
    else:
        cert = Destabilizer.build(phi, weights)
        if cert.surrogate >= 0:
            raise InternalError("separating direction does not violate the stability inequality")
        report = StabilityReport(UNSTABLE, poly, i, tuple(target), cert, residual, None,
                                 method, relative, diagnostics)
    return report


def _search_interior(poly, i, add, columns, target, chow_dim):
    """Add envelope triangulations of random integer weights until a
    full-dimensional subset has the target in its relative interior."""
    rng = random.Random(0)
    N = len(target)
    for _ in range(8 * N):
        phi = WeightVector(poly, i, tuple(Fraction(rng.randint(-N * N, N * N)) for _ in range(N)))
        if add(envelope_triangulation(phi)) and _interior_flag(columns, target, False, chow_dim) is False:
            return False
    return None


def _interior_flag(columns, target, full, chow_dim):
    """False if the target is interior to conv(columns) and that hull has the
    full dimension of Ch; True if the columns are complete and the target is
    on the boundary; None when undetermined."""
    K = len(columns)
    N = len(target)
    A, b = _lp_rows(columns, target)
    sums = [sum(col[k] for col in columns) for k in range(N)]
    A = [row + [s] for row, s in zip(A[:N], sums)] + [A[N] + [K]]
    res = linprog_eq([0] * K + [-1], A, b)
    t = -res.objective if res.status == "optimal" else Fraction(0)
    if t > 0:
        base = columns[0]
        dim = rank([[x - y for x, y in zip(col, base)] for col in columns[1:]]) if K > 1 else 0
        if dim == chow_dim:
            return False
        return False if full else None
    return True if full else None


def decide_chow(poly: DelzantPolytope, i: int, cap=None, method=None) -> StabilityReport:
    """Exact torus Chow semistability at level ``i`` with a certificate either way."""
    target = [target_scale(poly, i)] * count_lattice_points(poly, i)
    return decide_membership(poly, i, target, cap, method)
