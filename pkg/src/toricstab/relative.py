"""K-semistability for toric degenerations and its relative version.

Convex test functions ``h`` are stored as the negation of a concave PL
function; ``ConvexPL.concave`` is the single place where ``g = -h`` is
applied.  Functionals in the convex convention are non-positive on stable
polytopes, those in the concave convention non-negative.

The extremal affine function ``theta`` is the unique affine function with

    int (bvol/vol + theta) l dv = int_boundary l dsigma

for every affine ``l``.  It is zero when the barycentres of ``dv`` and
``dsigma`` coincide, for example on centrally symmetric polytopes.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from ._exact import Fraction, as_rational, common_denominator, fmt, solve
from .chow import StabilityReport, decide_membership, stability_functional, target_scale
from .envelope import (
    AffineFunction,
    ConcavePL,
    boundary_integral,
    classify,
    from_affine_min,
    integral_dv,
    lattice_sum,
)
from .errors import InputError, InternalError
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

POSITIVE = "positive"
ZERO = "zero"
NEGATIVE = "negative"


# ---------------------------------------------------------------------------
# convex test functions


@dataclass(frozen=True)
class ConvexPL:
    """A convex PL function ``h``, held as the concave function ``-h``."""

    concave: ConcavePL

    @classmethod
    def from_affine_max(cls, poly, pieces, level=None):
        return cls(from_affine_min(poly, [-p for p in pieces], level))

    @classmethod
    def negation_of(cls, g: ConcavePL):
        """The convex function ``-g``."""
        return cls(g)

    def __call__(self, x):
        return -self.concave(x)

    @property
    def polytope(self):
        return self.concave.polytope


def as_convex(h) -> ConvexPL:
    if isinstance(h, ConvexPL):
        return h
    raise InputError("expected a convex piecewise-linear function (ConvexPL)")


# ---------------------------------------------------------------------------
# integrals with an affine weight


def _integral_times_affine(g: ConcavePL, l: AffineFunction) -> Fraction:
    """Exact integral of g * l over the polytope."""
    total = Fraction(0)
    for cell in g.cells:
        for s in triangulate(cell.vertices):
            simplex = [cell.vertices[j] for j in s]
            n = len(simplex) - 1
            gv = [cell.affine(v) for v in simplex]
            lv = [l(v) for v in simplex]
            # product of two affine functions averaged over a simplex
            mixed = sum((a * b for a, b in zip(gv, lv)), Fraction(0)) + sum(gv) * sum(lv)
            total += simplex_volume(simplex) * mixed / ((n + 1) * (n + 2))
    return total


def _weighted_lattice_sum(g: ConcavePL, K: int, l: AffineFunction) -> Fraction:
    """Sum over poly meet (Z/K)^n of l(a) g(a), in integers."""
    X = scaled_lattice_points(g.polytope, K)
    d, ipieces = g._integer_pieces
    e = common_denominator(l.gradient + (l.constant,))
    lg = [int(c * e) for c in l.gradient]
    lc = int(l.constant * e)
    total = 0
    for x in X:
        gx = min(sum(a * b for a, b in zip(G, x)) + C * K for G, C in ipieces)
        lx = sum(a * b for a, b in zip(lg, x)) + lc * K
        total += gx * lx
    return Fraction(total, d * e * K * K)


# ---------------------------------------------------------------------------
# the extremal affine function


@dataclass(frozen=True)
class ExtremalAffine:
    gradient: tuple[Fraction, ...]
    constant: Fraction

    def __call__(self, x):
        return sum((g * as_rational(c) for g, c in zip(self.gradient, x)), self.constant)

    @property
    def affine(self) -> AffineFunction:
        return AffineFunction(self.gradient, self.constant)

    def is_zero(self) -> bool:
        return self.constant == 0 and not any(self.gradient)

    def to_json(self):
        return {"gradient": [fmt(g) for g in self.gradient], "constant": fmt(self.constant)}


def _extremal_rhs(mom):
    n = len(mom.first)
    ratio = mom.bvol / mom.vol
    return [mom.bvol - ratio * mom.vol] + [mom.bfirst[j] - ratio * mom.first[j] for j in range(n)]


def extremal_affine(poly: DelzantPolytope) -> ExtremalAffine:
    mom = moments(poly)
    gram = mom.gram()
    rhs = _extremal_rhs(mom)
    x = solve(gram, rhs)
    if x is None:
        raise InternalError("moment Gram matrix is singular")
    theta = ExtremalAffine(tuple(x[1:]), x[0])
    # defining identities, exactly
    coeffs = (theta.constant,) + theta.gradient
    for row, r in zip(gram, rhs):
        if sum((a * b for a, b in zip(row, coeffs)), Fraction(0)) != r:
            raise InternalError("extremal affine function fails its moment identities")
    return theta


# ---------------------------------------------------------------------------
# functionals


def donaldson_functional(poly: DelzantPolytope, h) -> Fraction:
    """(bvol/vol) int h dv - int_boundary h dsigma; K-semistable needs <= 0."""
    g = as_convex(h).concave
    if g.polytope != poly:
        raise InputError("function is defined on a different polytope")
    mom = moments(poly)
    return -(mom.bvol / mom.vol * integral_dv(g) - boundary_integral(g))


def relative_functional(poly: DelzantPolytope, h) -> Fraction:
    """int (bvol/vol + theta) h dv - int_boundary h dsigma; vanishes on affine h."""
    g = as_convex(h).concave
    if g.polytope != poly:
        raise InputError("function is defined on a different polytope")
    mom = moments(poly)
    theta = extremal_affine(poly)
    value = (mom.bvol / mom.vol * integral_dv(g) + _integral_times_affine(g, theta.affine)
             - boundary_integral(g))
    return -value


def p_leading_coefficient(poly: DelzantPolytope, g: ConcavePL) -> Fraction:
    """Limit of P(ki; g) / (ki)^(n-1) as k grows."""
    mom = moments(poly)
    return mom.vol / 2 * (mom.bvol / mom.vol * integral_dv(g) - boundary_integral(g))


def q_leading_coefficient(poly: DelzantPolytope, g: ConcavePL) -> Fraction:
    """Limit of Q(ki; g) / (ki)^(n-1) as k grows."""
    mom = moments(poly)
    theta = extremal_affine(poly)
    inner = (mom.bvol / mom.vol * integral_dv(g) + _integral_times_affine(g, theta.affine)
             - boundary_integral(g))
    return mom.vol / 2 * inner


def q_functional(poly: DelzantPolytope, i: int, k: int, g: ConcavePL) -> Fraction:
    """Q(ki; g) = E(ki) int g dv + vol * sum_a (theta(a)/(2ki) - 1) g(a)."""
    K = k * i
    if not classify(g, K).in_pl:
        raise InputError(f"function needs level {g.minimal_level}, which does not divide {K}")
    theta = extremal_affine(poly)
    vol = volume(poly)
    weighted = _weighted_lattice_sum(g, K, theta.affine)
    return (count_lattice_points(poly, K) * integral_dv(g)
            + vol * (weighted / (2 * K) - lattice_sum(g, K)))


def relative_chow_inequality(poly: DelzantPolytope, i: int, g: ConcavePL) -> Fraction:
    """E(i) int g dv - vol * sum_a (1 - theta(a)/(2i)) g(a); semistable needs >= 0."""
    return q_functional(poly, i, 1, g)


# ---------------------------------------------------------------------------
# asymptotic profiles


@dataclass(frozen=True)
class AsymptoticProfile:
    """Exact samples of value(ki) / (ki)^(n-1) against the closed-form limit.

    Sampled at multiples of the level of ``g`` both functionals are
    polynomials in ``k``, so the normalised values are exactly
    ``L + c_1/k + ... + c_m/k^m`` with ``m = n + 2``.  ``expansion`` holds
    ``(L, c_1, ..., c_m)`` solved from the samples ``k = kfit .. kfit + m``;
    ``expansion_exact`` records that it reproduces every other sample.
    """

    level: int
    samples: tuple[tuple[int, Fraction], ...]  # (k, raw value)
    normalised: tuple[tuple[int, Fraction], ...]
    limit: Fraction
    constant: Fraction  # C = kfit * |error(kfit)|
    kfit: int
    expansion: tuple[Fraction, ...]
    expansion_exact: bool

    @property
    def errors(self):
        return tuple((k, v - self.limit) for k, v in self.normalised)

    @property
    def holds(self) -> bool:
        """|error(k)| <= C/k for k >= kfit, with C fixed at kfit."""
        return all(abs(e) <= self.constant / k for k, e in self.errors if k >= self.kfit)

    @property
    def fitted_limit(self):
        return self.expansion[0] if self.expansion else None

    @property
    def expansion_constant(self) -> Fraction:
        """sum |c_j|, a bound on k |error(k)| for every k >= 1 once the expansion is exact."""
        return sum((abs(c) for c in self.expansion[1:]), Fraction(0))

    @property
    def converges(self) -> bool:
        """Expansion exact, its constant term equal to the limit, and the 1/k bound met."""
        C = self.expansion_constant
        return (self.expansion_exact and self.expansion[0] == self.limit
                and all(abs(e) <= C / k for k, e in self.errors))

    def to_rows(self):
        return [(k, raw, v, v - self.limit) for (k, raw), (_, v) in zip(self.samples, self.normalised)]


def _expansion(points, degree):
    """Solve v = L + sum_j c_j / k^j through the first degree + 1 points."""
    if len(points) < degree + 2:
        return (), False  # too few samples to solve and cross-check
    head = points[:degree + 1]
    rows = [[Fraction(1, k ** j) for j in range(degree + 1)] for k, _ in head]
    coeffs = solve(rows, [v for _, v in head])
    if coeffs is None:
        raise InternalError("singular expansion system")
    exact = all(sum((c / Fraction(k) ** j for j, c in enumerate(coeffs)), Fraction(0)) == v
                for k, v in points)
    return tuple(coeffs), exact


def _profile(poly, i, values, limit, kfit):
    n = poly.dimension
    samples = tuple(values)
    normalised = tuple((k, v / Fraction(k * i) ** (n - 1)) for k, v in samples)
    constant = abs(dict(normalised)[kfit] - limit) * kfit
    tail = [(k, v) for k, v in normalised if k >= kfit]
    # quadratic weights on each cell: numerator has degree n + 2 in k
    coeffs, exact = _expansion(tail, n + 2)
    exact = exact and all(
        sum((c / Fraction(k) ** j for j, c in enumerate(coeffs)), Fraction(0)) == v
        for k, v in normalised)
    return AsymptoticProfile(i, samples, normalised, limit, constant, kfit, coeffs, exact)


def _check_levels(i, kmax, kfit):
    if i <= 0:
        raise InputError("level must be positive")
    if kmax < kfit:
        raise InputError(f"kmax must be at least {kfit}")


def p_leading_check(poly: DelzantPolytope, i: int, g: ConcavePL, kmax: int = 32,
                    kfit: int = 4) -> AsymptoticProfile:
    _check_levels(i, kmax, kfit)
    values = [(k, stability_functional(poly, k * i, g)) for k in range(1, kmax + 1)]
    return _profile(poly, i, values, p_leading_coefficient(poly, g), kfit)


def q_leading_check(poly: DelzantPolytope, i: int, g: ConcavePL, kmax: int = 32,
                    kfit: int = 4) -> AsymptoticProfile:
    _check_levels(i, kmax, kfit)
    values = [(k, q_functional(poly, i, k, g)) for k in range(1, kmax + 1)]
    return _profile(poly, i, values, q_leading_coefficient(poly, g), kfit)


# ---------------------------------------------------------------------------
# verdicts over test families


@dataclass(frozen=True)
class FunctionVerdict:
    function: ConcavePL
    leading: Fraction
    branch: str  # positive | zero | negative

    @property
    def semistable(self) -> bool:
        return self.branch != NEGATIVE

    @property
    def strict(self) -> bool:
        return self.branch == POSITIVE

    def to_json(self):
        return {"leading_coefficient": fmt(self.leading), "branch": self.branch,
                "nonstrict_ok": self.semistable, "strict_ok": self.strict}


def _branch(x):
    return POSITIVE if x > 0 else NEGATIVE if x < 0 else ZERO


def k_semistable_for_toric_degenerations(poly: DelzantPolytope, functions):
    """Sign of the leading coefficient of P(ki; g) for each concave g."""
    return [FunctionVerdict(g, c, _branch(c))
            for g in functions for c in [p_leading_coefficient(poly, g)]]


def relative_k_semistable(poly: DelzantPolytope, functions):
    """Sign of the leading coefficient of Q(ki; g) for each concave g."""
    return [FunctionVerdict(g, c, _branch(c))
            for g in functions for c in [q_leading_coefficient(poly, g)]]


def crease_family(poly: DelzantPolytope, denominator: int = 2):
    """Concave creases ``min(0, c - <u, x>)`` and affine functions.

    Directions ``u`` are the facet normals and the vectors with entries in
    {-1, 0, 1}; offsets ``c`` run over multiples of 1/denominator strictly
    inside the range of ``<u, x>`` on the polytope.
    """
    n = poly.dimension
    dirs = {tuple(f.normal) for f in poly.facets}
    for u in product((-1, 0, 1), repeat=n):
        if any(u):
            dirs.add(u)
    zero = AffineFunction(tuple(Fraction(0) for _ in range(n)), Fraction(0))
    out = []
    for u in sorted(dirs):
        vals = [sum(a * b for a, b in zip(u, v)) for v in poly.vertices]
        lo, hi = min(vals), max(vals)
        grad = tuple(Fraction(-a) for a in u)
        for t in range(lo * denominator + 1, hi * denominator):
            out.append(from_affine_min(poly, [zero, AffineFunction(grad, Fraction(t, denominator))]))
    for j in range(n):
        grad = tuple(Fraction(int(k == j)) for k in range(n))
        out.append(from_affine_min(poly, [AffineFunction(grad, Fraction(0))]))
    return out


# ---------------------------------------------------------------------------
# relative Chow semistability


def relative_target(poly: DelzantPolytope, i: int):
    theta = extremal_affine(poly)
    c = target_scale(poly, i)
    return [c * (1 - theta(a) / (2 * i)) for a in lattice_points(poly, i)]


def decide_relative_chow(poly: DelzantPolytope, i: int, cap=None, method=None) -> StabilityReport:
    """Membership of the theta-shifted target in the Chow polytope at level ``i``."""
    return decide_membership(poly, i, relative_target(poly, i), cap, method, relative=True)
