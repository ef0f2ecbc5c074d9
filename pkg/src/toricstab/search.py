"""Floating-point search for destabilising weight vectors, certified exactly.

The search minimises

    F(phi) = E(i) int g_phi dv - vol * sum_a phi(a)

over the box ``[-1, 1]^A``.  ``F`` is convex and positively homogeneous: the
integral of the envelope is the maximum over triangulations of the linear
forms ``(phi, psi_T) / ((n+1)! i^n)``, and the triangulation of the upper hull
of the lifted points attains it, so its weight gives a subgradient.  Because
``g_phi >= phi`` on the lattice, ``F(phi) < 0`` forces ``P(i; g_phi) < 0``.

Floats only steer.  Every candidate is rounded to a rational vector and
re-evaluated exactly, and only an exact negative produces a verdict.
"""
from __future__ import annotations

import random
from math import factorial

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ._exact import Fraction
from .chow import INCONCLUSIVE, UNSTABLE, Destabilizer, StabilityReport, linear_obstruction, target_scale
from .envelope import WeightVector
from .geometry import DelzantPolytope, count_lattice_points, lattice_points, scaled_lattice_points, volume

DENOMINATOR_LIMITS = (10, 100, 10 ** 4, 10 ** 6)  # small denominators first


class _Objective:
    def __init__(self, poly, i):
        self.X = np.array(scaled_lattice_points(poly, i), dtype=float)
        self.N, self.n = self.X.shape
        self.E = float(count_lattice_points(poly, i))
        self.vol = float(volume(poly))
        self.norm = float(factorial(self.n + 1) * i ** self.n)

    def psi(self, phi):
        """Weight of the triangulation induced by the upper hull of (X, phi)."""
        lifted = np.column_stack([self.X, phi])
        hull = ConvexHull(lifted, qhull_options="QJ Pp")
        psi = np.zeros(self.N)
        for simplex, eq in zip(hull.simplices, hull.equations):
            if eq[-2] <= 1e-6:  # upper facets only; unit normals
                continue
            pts = self.X[simplex]
            v = abs(np.linalg.det(pts[1:] - pts[0]))
            psi[simplex] += v
        return psi

    def value_and_subgradient(self, phi):
        psi = self.psi(phi)
        grad = self.E * psi / self.norm - self.vol
        return float(grad @ phi), grad


def _rationalise(phi, limit):
    return tuple(Fraction(float(x)).limit_denominator(limit) for x in phi)


def _seeds(poly, i, rng, restarts):
    pts = lattice_points(poly, i)
    n = poly.dimension
    residual = linear_obstruction(poly, i)
    out = []
    if any(residual):
        # affine functions along the residual: F is linear there
        for s in (1, -1):
            out.append([s * float(sum(r * a for r, a in zip(residual, p))) for p in pts])
    for j in range(n):
        for s in (1, -1):
            out.append([s * float(p[j]) for p in pts])
    while len(out) < restarts:
        out.append([rng.uniform(-1, 1) for _ in pts])
    return out


def _scale_to_box(phi):
    m = np.max(np.abs(phi))
    return phi / m if m > 0 else phi


def destabilizer_search(poly: DelzantPolytope, i: int, budget: int = 2000, seed: int = 0,
                        restarts: int = 8) -> StabilityReport:
    """Look for ``phi`` with ``P(i; g_phi) < 0``; never reports semistable."""
    rng = random.Random(seed)
    obj = _Objective(poly, i)
    N = obj.N
    per_run = max(1, budget // max(1, restarts))
    tried = set()
    evaluations = 0

    def certify(phi):
        phi = _scale_to_box(np.asarray(phi))
        for limit in DENOMINATOR_LIMITS:
            q = _rationalise(phi, limit)
            if q in tried:
                continue
            tried.add(q)
            d = Destabilizer.build(WeightVector(poly, i, q))
            if d.value < 0:
                return d
        return None

    found = None
    for start in _seeds(poly, i, rng, restarts):
        phi = _scale_to_box(np.asarray(start, dtype=float))
        f_best = np.inf
        delta = 1.0
        for _ in range(per_run):
            try:
                f, s = obj.value_and_subgradient(phi)
            except QhullError:
                break
            evaluations += 1
            if f < f_best - 1e-12:
                f_best = f
                delta = max(delta, 1e-3)
            else:
                delta *= 0.7
            if f < -1e-9:
                found = certify(phi)
                if found is not None:
                    break
            # Polyak step towards a target below the best value so far
            target = min(f_best, 0.0) - delta
            ss = float(s @ s)
            if ss == 0.0:
                break
            phi = np.clip(phi - (f - target) / ss * s, -1.0, 1.0)
            phi = phi - phi.mean()
        if found is not None:
            break
        if f_best < 0:
            found = certify(phi)
            if found is not None:
                break

    residual = linear_obstruction(poly, i)
    target = tuple([target_scale(poly, i)] * N)
    diagnostics = {"points": N, "evaluations": evaluations, "candidates_checked": len(tried)}
    if found is not None:
        return StabilityReport(UNSTABLE, poly, i, target, found, residual, None, "search",
                               diagnostics=diagnostics)
    return StabilityReport(INCONCLUSIVE, poly, i, target, None, residual, None, "search",
                           diagnostics=diagnostics)
