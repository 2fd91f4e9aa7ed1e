"""Exact rational linear algebra on small matrices (sympy-backed).

Vectors are tuples of :class:`fractions.Fraction`.  Inputs may be ints,
Fractions or floats; floats are converted exactly (binary value).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import sympy as sp

Vec = tuple[Fraction, ...]


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, sp.Rational):
        return Fraction(int(x.p), int(x.q))
    return Fraction(x)


def _sym(x) -> sp.Rational:
    f = to_fraction(x)
    return sp.Rational(f.numerator, f.denominator)


def _matrix(rows: Sequence[Sequence], ncols: int) -> sp.Matrix:
    if not rows:
        return sp.zeros(0, ncols)
    return sp.Matrix([[_sym(v) for v in row] for row in rows])


def _vec(col) -> Vec:
    return tuple(to_fraction(v) for v in col)


def row_basis(vectors: Sequence[Sequence], n: int) -> list[Vec]:
    """Basis of span(vectors) in reduced row echelon form."""
    if not vectors:
        return []
    rref, pivots = _matrix(vectors, n).rref()
    return [_vec(rref.row(i)) for i in range(len(pivots))]


def rank(vectors: Sequence[Sequence], n: int) -> int:
    return len(row_basis(vectors, n))


def orth_complement(vectors: Sequence[Sequence], n: int) -> list[Vec]:
    """Basis of the orthogonal complement of span(vectors) in Q^n."""
    if not vectors:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    null = _matrix(vectors, n).nullspace()
    return [_normalize(_vec(v)) for v in null]


def _normalize(v: Vec) -> Vec:
    """Scale to a primitive integer vector with positive first nonzero entry."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    g = g or 1
    sign = 1
    for x in ints:
        if x != 0:
            sign = 1 if x > 0 else -1
            break
    return tuple(Fraction(sign * x, g) for x in ints)


def in_span(v: Sequence, basis: Sequence[Sequence], n: int) -> bool:
    if all(to_fraction(x) == 0 for x in v):
        return True
    if not basis:
        return False
    return rank(list(basis) + [list(v)], n) == rank(basis, n)


def solve(columns: Sequence[Sequence], rhs: Sequence) -> Vec | None:
    """Solve sum_k c_k * columns[k] = rhs exactly when the columns are
    independent; returns None if inconsistent.  Raises ValueError if the
    columns are dependent (non-unique solution)."""
    n = len(rhs)
    if not columns:
        return () if all(to_fraction(x) == 0 for x in rhs) else None
    A = _matrix(columns, n).T
    if A.rank() < len(columns):
        raise ValueError("columns are linearly dependent")
    b = sp.Matrix([_sym(x) for x in rhs])
    try:
        sol, params = A.gauss_jordan_solve(b)
    except ValueError:
        return None
    return _vec(sol)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), 0)
