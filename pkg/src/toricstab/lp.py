"""Exact two-phase simplex method with Bland's rule.

Solves ``min c.x  s.t.  A x = b, x >= 0`` over the rationals.  The tableau is
kept fraction-free: every entry is an integer and the true value is
``entry / D`` where ``D`` is the current basis determinant.  Pivoting uses the
integer-preserving update ``(T_rj * P - T_rq * T_pj) / D`` whose division is
always exact.  Bland's smallest-index rule prevents cycling.

An infeasible problem comes back with a Farkas certificate ``y`` such that
``y.A_j <= 0`` for every column and ``y.b > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

from ._exact import Fraction, common_denominator
from .errors import InternalError


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None
    farkas: tuple[Fraction, ...] | None = None
    pivots: int = 0


class _Tableau:
    def __init__(self, rows, rhs, nvars):
        self.m = len(rows)
        self.nvars = nvars
        # columns: structural | artificial | rhs
        self.T = []
        for i, (row, b) in enumerate(zip(rows, rhs)):
            art = [0] * self.m
            art[i] = 1
            self.T.append(list(row) + art + [b])
        self.D = 1
        self.basis = [nvars + i for i in range(self.m)]
        self.obj = None
        self.pivots = 0

    @property
    def ncols(self):
        return self.nvars + self.m

    def pivot(self, p, q):
        T, D = self.T, self.D
        P = T[p][q]
        prow = T[p]
        for r in range(len(T)):
            if r == p:
                continue
            row = T[r]
            f = row[q]
            if f == 0:
                T[r] = [(x * P) // D for x in row] if P != D else row
            else:
                T[r] = [(x * P - f * y) // D for x, y in zip(row, prow)]
        obj = self.obj
        f = obj[q]
        if f == 0:
            self.obj = [(x * P) // D for x in obj]
        else:
            self.obj = [(x * P - f * y) // D for x, y in zip(obj, prow)]
        self.D = P
        if P < 0:
            self.T = [[-x for x in row] for row in self.T]
            self.obj = [-x for x in self.obj]
            self.D = -P
        self.basis[p] = q
        self.pivots += 1

    def run(self, allowed):
        """Bland iterations; returns 'optimal' or ('unbounded', column)."""
        while True:
            q = next((j for j in allowed if self.obj[j] < 0), None)
            if q is None:
                return "optimal"
            best = None
            for r, row in enumerate(self.T):
                a = row[q]
                if a > 0:
                    key = (Fraction(row[-1], a), self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return "unbounded"
            self.pivot(best[1], q)

    def value(self, j):
        for r, bj in enumerate(self.basis):
            if bj == j:
                return Fraction(self.T[r][-1], self.D)
        return Fraction(0)


def _scale_rows(A, b):
    rows, rhs, scales = [], [], []
    for row, bi in zip(A, b):
        row = [Fraction(x) for x in row]
        bi = Fraction(bi)
        s = common_denominator(row + [bi])
        sign = -1 if bi < 0 else 1
        rows.append([int(x * s) * sign for x in row])
        rhs.append(int(bi * s) * sign)
        scales.append(s * sign)
    return rows, rhs, scales


def linprog_eq(c, A, b, *, feasibility_only=False) -> LPResult:
    """Minimise ``c.x`` subject to ``A x = b``, ``x >= 0`` exactly."""
    m = len(A)
    nvars = len(c) if c is not None else len(A[0])
    rows, rhs, scales = _scale_rows(A, b)
    tab = _Tableau(rows, rhs, nvars)
    # phase 1 reduced costs: -sum of rows on structural columns, 0 on artificials
    obj = [-sum(r[j] for r in rows) for j in range(nvars)] + [0] * m + [-sum(rhs)]
    tab.obj = obj
    tab.run(range(nvars + m))
    w = Fraction(-tab.obj[-1], tab.D)
    if w > 0:
        # duals of the scaled system: y'_i = 1 - reduced cost of artificial i
        y_scaled = [1 - Fraction(tab.obj[nvars + i], tab.D) for i in range(m)]
        y = tuple(yi * s for yi, s in zip(y_scaled, scales))
        _check_farkas(y, A, b)
        return LPResult("infeasible", farkas=y, pivots=tab.pivots)

    # drive zero-level artificials out of the basis where possible
    for r in range(m):
        if tab.basis[r] >= nvars:
            q = next((j for j in range(nvars) if tab.T[r][j] != 0), None)
            if q is not None:
                tab.pivot(r, q)
    x = tuple(tab.value(j) for j in range(nvars))
    if feasibility_only or c is None:
        return LPResult("optimal", x=x, objective=Fraction(0), pivots=tab.pivots)

    cvals = [Fraction(v) for v in c]
    cs = common_denominator(cvals)
    ci = [int(v * cs) for v in cvals] + [0] * m
    D = tab.D
    obj = [ci[j] * D if j < nvars + m else 0 for j in range(nvars + m + 1)]
    for r, bj in enumerate(tab.basis):
        cb = ci[bj]
        if cb:
            row = tab.T[r]
            obj = [o - cb * t for o, t in zip(obj, row)]
    tab.obj = obj
    status = tab.run(range(nvars))
    if status == "unbounded":
        return LPResult("unbounded", pivots=tab.pivots)
    x = tuple(tab.value(j) for j in range(nvars))
    return LPResult("optimal", x=x, objective=sum((a * v for a, v in zip(cvals, x)), Fraction(0)),
                    pivots=tab.pivots)


def _check_farkas(y, A, b):
    if sum((yi * Fraction(bi) for yi, bi in zip(y, b)), Fraction(0)) <= 0:
        raise InternalError("Farkas certificate has non-positive right-hand side")
    ncols = len(A[0]) if A else 0
    for j in range(ncols):
        if sum((yi * Fraction(A[i][j]) for i, yi in enumerate(y)), Fraction(0)) > 0:
            raise InternalError("Farkas certificate violates a column inequality")
