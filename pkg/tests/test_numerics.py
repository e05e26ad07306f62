import itertools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from kdebounds.numerics import (
    MIN_PREC,
    Matrix,
    PivotUnderflowError,
    SingularMatrixError,
    det,
    exact_value,
    fmt,
    inverse,
    power_matrix,
    tau,
    tau_coarse,
    to_scalar,
    vandermonde,
)

F = Fraction


def leibniz(rows):
    """Determinant by the permutation sum; independent of elimination."""
    n = len(rows)
    total = F(0)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = F(-1) ** inv
        for i, j in enumerate(perm):
            term *= rows[i][j]
        total += term
    return total


small_rational = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def square(n_max=4):
    return st.integers(1, n_max).flatmap(
        lambda n: st.lists(st.lists(small_rational, min_size=n, max_size=n), min_size=n, max_size=n)
    )


def test_det_examples():
    assert det(Matrix.identity(2)) == 1
    assert det(Matrix.from_rows([[F(1, 2), F(1, 3)], [F(1, 3), F(1, 4)]])) == F(1, 72)
    assert vandermonde([1, 2, 3]) == 2


def test_det_rejects_non_square():
    with pytest.raises(ValueError):
        det(Matrix.from_rows([[1, 2, 3], [4, 5, 6]]))


def test_inverse_examples():
    assert inverse(Matrix.identity(3)) == Matrix.identity(3)
    assert inverse(Matrix.from_rows([[1, 1], [1, 2]])).tolist() == [[2, -1], [-1, 1]]
    assert inverse(Matrix.diag([F(1, 2), F(1, 2)])) == Matrix.diag([2, 2])


def test_inverse_singular():
    with pytest.raises(SingularMatrixError):
        inverse(Matrix.from_rows([[1, 2], [2, 4]]))


def test_tau_examples():
    assert tau(Matrix.identity(3)) == 1
    assert tau(Matrix.from_rows([[1, 1], [1, 2]])) == 3
    assert tau(Matrix.diag([F(1, 2), F(1, 4)])) == 4


@given(square())
def test_det_matches_leibniz(rows):
    assert det(Matrix.from_rows(rows)) == leibniz(rows)


@given(square(6).map(lambda r: [[F(int(x)) for x in row] for row in r]))
def test_inverse_exact_identity(rows):
    m = Matrix.from_rows(rows)
    assume(det(m) != 0)
    n = m.rows
    assert m @ inverse(m) == Matrix.identity(n)
    assert inverse(m) @ m == Matrix.identity(n)


@given(square(5))
def test_tau_below_coarse(rows):
    m = Matrix.from_rows(rows)
    assume(det(m) != 0)
    assert tau(m) <= tau_coarse(m)


@given(square(4))
def test_bigfloat_inverse_close(rows):
    m = Matrix.from_rows(rows)
    assume(det(m) != 0)
    prec = 128
    mf = m.to_prec(prec)
    prod = mf @ inverse(mf)
    scale = max(abs(x) for x in m.entries) * tau(m)
    with mpmath.workprec(prec):
        for i in range(m.rows):
            for j in range(m.cols):
                err = abs(prod[i, j] - (1 if i == j else 0))
                assert err <= mpmath.ldexp(1, -(prec - 10)) * max(1, scale) * m.rows


def test_bigfloat_det_matches_exact():
    rows = [[F(1, i + j + 1) for j in range(5)] for i in range(5)]
    exact = det(Matrix.from_rows(rows))
    approx = det(Matrix.from_rows(rows, 200))
    assert abs(exact_value(approx) - exact) < abs(exact) * F(1, 2 ** 150)


def test_precision_carried_and_checked():
    m = Matrix.from_rows([[1, 2], [3, 4]], 96)
    assert inverse(m).prec == 96
    with pytest.raises(ValueError):
        Matrix.from_rows([[1]], MIN_PREC - 1)


def test_pivot_underflow():
    # 1 + 2^-60 is representable at 64 bits, but the pivot it leaves is below the floor
    with mpmath.workprec(64):
        m = Matrix.from_rows([[1, 1], [1, 1 + mpmath.ldexp(1, -60)]], 64)
    with pytest.raises(PivotUnderflowError):
        inverse(m)


def test_exact_mode_rejects_floats():
    with pytest.raises(TypeError):
        to_scalar(0.5)


def test_pivot_ties_lowest_row():
    # equal magnitudes in column 0: the first row stays the pivot, so no sign flip
    m = Matrix.from_rows([[1, 2], [-1, 3]])
    assert det(m) == 5


def test_power_matrix_is_vandermonde():
    u = [F(1, 2), F(2, 3), F(3)]
    assert det(power_matrix(u, [0, 1, 2])) == vandermonde(u)


def test_fmt_deterministic():
    assert fmt(F(1, 3)) == fmt(F(1, 3))
    assert fmt(F(6, 3)) == "2"
    assert fmt(mpmath.mpf(1) / 3) == mpmath.nstr(mpmath.mpf(1) / 3, 17)
