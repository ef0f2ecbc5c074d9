"""Small exact linear-algebra kit over ``int`` and ``Fraction``.

Everything here is pure Python integer/rational arithmetic.  Matrices are
lists of rows.  No function in this module ever produces a float.
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import factorial, gcd, lcm
from numbers import Rational

from .errors import InputError

__all__ = [
    "Fraction",
    "as_rational",
    "fmt",
    "det",
    "rref",
    "rank",
    "nullspace",
    "solve",
    "primitive",
    "common_denominator",
    "integerize",
    "dot",
    "sub",
    "factorial",
]


def as_rational(x) -> Fraction:
    """Parse ``x`` (int, Fraction or decimal string like ``"-3/2"``) exactly.

    Floats and bools are refused: a float in an exact path is a bug.
    """
    if isinstance(x, bool):
        raise InputError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        # Fraction parses "3/2", "-4" and "0.25" exactly
        try:
            return Fraction(x.strip())
        except ValueError:
            raise InputError(f"{x!r} is not a rational number") from None
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    raise InputError(f"cannot interpret {type(x).__name__} {x!r} as an exact rational")


def fmt(q) -> str:
    """Canonical ``p/q`` string (``"3"`` for integers)."""
    return str(Fraction(q))


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def det(rows):
    """Exact determinant.  Integer input uses Bareiss and stays integral."""
    n = len(rows)
    if n == 0:
        return 1
    if all(isinstance(x, int) for r in rows for x in r):
        return _bareiss(rows)
    m = [[Fraction(x) for x in r] for r in rows]
    sign = 1
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        p = m[col][col]
        result *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                row_r, row_c = m[r], m[col]
                for c in range(col + 1, n):
                    row_r[c] -= f * row_c[c]
    return sign * result


def _bareiss(rows):
    m = [list(r) for r in rows]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        mkk = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * mkk - mik * row_k[j]) // prev
        prev = mkk
    return sign * m[n - 1][n - 1]


def rref(rows):
    """Reduced row echelon form over Q.  Returns (matrix, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(m)) if m[k][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for k in range(len(m)):
            if k != r and m[k][c] != 0:
                f = m[k][c]
                m[k] = [a - f * b for a, b in zip(m[k], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def nullspace(rows, ncols=None):
    """Basis of the right null space of ``rows`` (list of Fraction tuples)."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    ncols = len(rows[0])
    m, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][f]
        basis.append(tuple(v))
    return basis


def solve(a, b):
    """Unique solution of the square system ``a x = b`` or ``None`` if singular."""
    n = len(a)
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    m, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return tuple(m[r][n] for r in range(n))


def common_denominator(values) -> int:
    return reduce(lcm, (Fraction(v).denominator for v in values), 1)


def integerize(values):
    """Scale a rational vector to a primitive integer vector (same direction)."""
    values = [Fraction(v) for v in values]
    d = common_denominator(values)
    ints = [int(v * d) for v in values]
    g = reduce(gcd, ints, 0)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


primitive = integerize
