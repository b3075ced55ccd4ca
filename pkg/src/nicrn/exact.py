"""Exact rational linear algebra for small integer/rational matrices.

Conservation laws and cycle spaces of reaction networks must hold exactly,
so kernels are computed by Gaussian elimination over :class:`fractions.Fraction`.
Matrices are plain lists of rows.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, List, Sequence, Tuple

import numpy as np

Matrix = List[List[Fraction]]


def to_fractions(rows: Iterable[Iterable]) -> Matrix:
    """Convert a nested sequence of ints/floats/Fractions to a Fraction matrix.

    Floats are converted exactly (every binary float is a rational).
    """
    return [[x if isinstance(x, Fraction) else Fraction(x) for x in row] for row in rows]


def transpose(m: Sequence[Sequence]) -> Matrix:
    if not m:
        return []
    return [list(col) for col in zip(*m)]


def rref(
    m: Sequence[Sequence], reverse_pivots: bool = False, n_pivot_cols: int | None = None
) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form.

    Args:
        m: matrix as a list of rows.
        reverse_pivots: search pivot columns from the last column backwards.
            The resulting basic solutions put their nonzero entries on the
            highest-index unknowns.
        n_pivot_cols: only the first ``n_pivot_cols`` columns may hold pivots;
            the rest are carried along (useful for augmented matrices).

    Returns:
        (R, pivots) where ``pivots[i]`` is the pivot column of row ``i``.
    """
    a = to_fractions(m)
    n_rows = len(a)
    n_cols = len(a[0]) if n_rows else 0
    k = n_cols if n_pivot_cols is None else n_pivot_cols
    order = range(k - 1, -1, -1) if reverse_pivots else range(k)
    pivots: List[int] = []
    r = 0
    for c in order:
        if r == n_rows:
            break
        p = next((i for i in range(r, n_rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(n_rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: Sequence[Sequence]) -> int:
    if not m or not m[0]:
        return 0
    return len(rref(m)[1])


def nullspace(m: Sequence[Sequence], n_cols: int | None = None) -> Matrix:
    """Basis of the right kernel ``{x : m x = 0}`` as a list of vectors."""
    if not m:
        if n_cols is None:
            raise ValueError("n_cols required for an empty matrix")
        return [[Fraction(int(i == j)) for i in range(n_cols)] for j in range(n_cols)]
    n = len(m[0])
    r, pivots = rref(m)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in enumerate(pivots):
            v[pc] = -r[row][f]
        basis.append(v)
    return basis


def left_nullspace(m: Sequence[Sequence]) -> Matrix:
    """Basis of ``{c : c^T m = 0}``."""
    n_rows = len(m)
    if n_rows == 0:
        return []
    if not m[0]:
        return nullspace([], n_cols=n_rows)
    return nullspace(transpose(m), n_cols=n_rows)


def column_basis(m: Sequence[Sequence]) -> Matrix:
    """Basis of the column space: the pivot columns of ``m`` (as vectors)."""
    if not m or not m[0]:
        return []
    _, pivots = rref(m)
    cols = transpose(to_fractions(m))
    return [cols[c] for c in pivots]


def primitive_integer(v: Sequence[Fraction]) -> List[int]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    lcm = 1
    for x in v:
        d = Fraction(x).denominator
        lcm = lcm * d // gcd(lcm, d)
    ints = [int(Fraction(x) * lcm) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    first = next((x for x in ints if x != 0), 0)
    if first < 0:
        ints = [-x for x in ints]
    return ints


def integer_nullspace(m: Sequence[Sequence], n_cols: int | None = None) -> List[List[int]]:
    return [primitive_integer(v) for v in nullspace(m, n_cols=n_cols)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def in_span(vectors: Sequence[Sequence], v: Sequence) -> bool:
    """True when ``v`` is an exact linear combination of ``vectors``."""
    if not vectors:
        return all(Fraction(x) == 0 for x in v)
    base = rank(vectors)
    return rank(list(vectors) + [list(v)]) == base


def is_rational_float(x: float, max_denominator: int = 10**6) -> bool:
    """Whether a float is (to the last bit) a 'small' rational number."""
    if not np.isfinite(x):
        return False
    f = Fraction(x).limit_denominator(max_denominator)
    return float(f) == x


def as_float_array(m: Sequence[Sequence], shape: Tuple[int, int] | None = None) -> np.ndarray:
    arr = np.array([[float(x) for x in row] for row in m], dtype=float)
    if arr.size == 0 and shape is not None:
        return np.zeros(shape)
    return arr
