"""Exact rational linear algebra on lists of rows.

Everything here works on ``fractions.Fraction`` (ints are accepted and
promoted).  Matrices are plain lists of row lists; nothing is mutated in
place unless the function name says so.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Row = list  # list[Fraction]


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted in exact arithmetic: %r" % (x,))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def as_matrix(rows: Iterable[Iterable]) -> list:
    return [[to_fraction(v) for v in row] for row in rows]


def _independent_rows(m, ncols) -> list:
    """Indices of a maximal independent subset of ``m``, found with
    fraction-free integer elimination (much cheaper than Fraction rref on
    tall matrices)."""
    basis = []  # (pivot, int row)
    keep = []
    for idx, row in enumerate(m):
        den = 1
        for x in row:
            if x.denominator != 1:
                den = den * x.denominator // math.gcd(den, x.denominator)
        r = [int(x * den) for x in row]
        for p, b in basis:
            c = r[p]
            if c:
                bp = b[p]
                r = [x * bp - c * y for x, y in zip(r, b)]
        piv = next((j for j, x in enumerate(r) if x), None)
        if piv is None:
            continue
        g = 0
        for x in r:
            if x:
                g = math.gcd(g, x)
        if g > 1:
            r = [x // g for x in r]
        basis.append((piv, r))
        keep.append(idx)
        if len(basis) == ncols:
            break
    return keep


def rref(rows: Sequence[Sequence], ncols: Optional[int] = None):
    """Reduced row echelon form.

    Returns ``(R, pivots)`` where ``R`` holds only the nonzero rows, each
    normalised to a leading 1, and ``pivots`` lists their pivot columns.
    """
    m = as_matrix(rows)
    if ncols is None:
        ncols = len(m[0]) if m else 0
    if len(m) > ncols and all(len(r) == ncols for r in m):
        m = [m[i] for i in _independent_rows(m, ncols)]
    pivots = []
    r = 0
    nrows = len(m)
    for c in range(ncols):
        if r == nrows:
            break
        piv = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        if inv != 1:
            m[r] = [v * inv for v in m[r]]
        prow = m[r]
        for i in range(nrows):
            if i != r:
                f = m[i][c]
                if f != 0:
                    row = m[i]
                    m[i] = [a - f * b if b != 0 else a for a, b in zip(row, prow)]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: Optional[int] = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list:
    """Basis of ``{x : A x = 0}`` for ``A`` given by ``rows`` (``ncols`` unknowns)."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    R, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(R, pivots):
            x[p] = -row[f]
        basis.append(x)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int):
    """One solution of ``A x = b`` with free variables set to zero, or ``None``."""
    aug = [list(r) + [b] for r, b in zip(as_matrix(rows), as_matrix([rhs])[0])]
    if not aug:
        return [Fraction(0)] * ncols
    R, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(R, pivots):
        x[p] = row[ncols]
    return x


def inverse(rows: Sequence[Sequence]) -> list:
    n = len(rows)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(as_matrix(rows))]
    R, pivots = rref(aug, 2 * n)
    if len(pivots) < n or pivots[n - 1] != n - 1:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R]


def det(rows: Sequence[Sequence]) -> Fraction:
    m = as_matrix(rows)
    n = len(m)
    sign = 1
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        d *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] * inv
            if f != 0:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return sign * d


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def transpose(a: Sequence[Sequence]) -> list:
    return [list(col) for col in zip(*a)]


def identity(n: int) -> list:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def extend_to_basis(rows: Sequence[Sequence], n: int) -> list:
    """Append standard unit vectors (lowest index first) until ``rows`` spans ``Q^n``.

    ``rows`` must be independent; the returned list starts with them.
    """
    out = [list(r) for r in as_matrix(rows)]
    _, pivots = rref(out, n) if out else ([], [])
    for c in range(n):
        if c not in pivots:
            out.append([Fraction(int(j == c)) for j in range(n)])
    return out


def independent_subset(rows: Sequence[Sequence], n: int) -> list:
    """Indices of a greedy maximal independent subset, in input order."""
    keep = []
    acc = []
    r = 0
    for i, row in enumerate(rows):
        trial = acc + [list(row)]
        rk = rank(trial, n)
        if rk > r:
            acc = trial
            keep.append(i)
            r = rk
    return keep
