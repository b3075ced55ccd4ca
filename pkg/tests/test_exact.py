from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from nicrn import exact

small_int_matrix = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


@given(small_int_matrix)
@settings(max_examples=150, deadline=None)
def test_nullspace_annihilates_exactly_and_has_full_dimension(m):
    basis = exact.nullspace(m)
    n = len(m[0])
    for v in basis:
        assert all(sum(Fraction(a) * x for a, x in zip(row, v)) == 0 for row in m)
    assert exact.rank(m) + len(basis) == n
    # Independent check against the float rank.
    assert exact.rank(m) == np.linalg.matrix_rank(np.array(m, dtype=float))


@given(small_int_matrix)
@settings(max_examples=100, deadline=None)
def test_left_nullspace_and_column_basis(m):
    ker = exact.left_nullspace(m)
    im = exact.column_basis(m)
    assert len(ker) + len(im) == len(m)
    for c in ker:
        for col in exact.transpose(m):
            assert sum(Fraction(a) * b for a, b in zip(c, col)) == 0
    for v in im:
        assert exact.in_span(exact.transpose(m), v)


def test_integer_nullspace_is_primitive():
    m = [[2, 4, -6]]
    for v in exact.integer_nullspace(m):
        assert all(isinstance(x, int) for x in v)
        assert np.gcd.reduce([abs(x) for x in v]) == 1
        assert next(x for x in v if x) > 0


def test_reverse_pivots_prefer_last_columns():
    _, piv = exact.rref([[-1, -1, 1]], reverse_pivots=True)
    assert piv == [2]
    _, piv = exact.rref([[-1, -1, 1]])
    assert piv == [0]


def test_pivot_search_can_be_limited_to_leading_columns():
    aug = [[1, 1, 1, 0], [2, 2, 0, 1]]
    R, piv = exact.rref(aug, n_pivot_cols=2)
    assert piv == [0]
    assert R[1][:2] == [0, 0]
    # The carried columns record the row operations.
    assert R[1][2:] == [Fraction(-2), Fraction(1)] or R[1][2:] == [Fraction(1), Fraction(-1, 2)]


def test_is_rational_float():
    assert exact.is_rational_float(1.5)
    assert exact.is_rational_float(-0.1)
    assert not exact.is_rational_float(np.pi)
    assert not exact.is_rational_float(float("nan"))
