import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdebounds import schur as S
from kdebounds.numerics import exact_value

F = Fraction


def brute_ssyt(lam):
    """Every filling of the shape checked against the row/column rules."""
    m = len(lam)
    cells = [(i, j) for i in range(m) for j in range(lam[i])]
    out = []
    for vals in itertools.product(range(1, m + 1), repeat=len(cells)):
        rows = [[0] * lam[i] for i in range(m)]
        for (i, j), v in zip(cells, vals):
            rows[i][j] = v
        t = S.SSYT(tuple(lam), tuple(tuple(r) for r in rows))
        if t.is_valid():
            out.append(t)
    return sorted(out, key=lambda t: t.reading_word)


def partitions(max_weight=6, max_parts=4):
    for m in range(1, max_parts + 1):
        yield from S.partitions_up_to(max_weight, m)


def test_partition_count():
    assert sum(1 for _ in partitions()) == 73


def test_partitions_are_ordered():
    lams = list(S.partitions_up_to(5, 3))
    assert lams == sorted(lams, key=lambda lam: (sum(lam), lam))
    assert all(S.check_partition(lam) == lam for lam in lams)


def test_check_partition_rejects():
    with pytest.raises(ValueError):
        S.check_partition((2, 1))
    with pytest.raises(ValueError):
        S.check_partition((-1, 0))


@pytest.mark.parametrize("lam,count", [((0, 1), 2), ((1, 1), 1), ((2,), 1), ((0, 0), 1)])
def test_enumeration_examples(lam, count):
    assert len(S.enumerate_ssyt(lam)) == count


def test_single_tableau_of_11():
    (t,) = S.enumerate_ssyt((1, 1))
    assert t.rows == ((1,), (2,))


@pytest.mark.parametrize("lam", [lam for lam in partitions(4, 3)])
def test_enumeration_matches_brute_force(lam):
    assert S.enumerate_ssyt(lam) == brute_ssyt(lam)


@pytest.mark.parametrize("lam", list(partitions()))
def test_weyl_matches_count_and_types_sum(lam):
    tabs = S.enumerate_ssyt(lam)
    assert S.weyl_dimension(lam) == len(tabs)
    assert len(set(t.reading_word for t in tabs)) == len(tabs)
    assert all(sum(t.type()) == sum(lam) and t.is_valid() for t in tabs)


def test_littlewood_examples():
    assert S.schur_littlewood((0, 1), [1, 1]) == 2
    assert S.schur_littlewood((1, 1), [2, 3]) == 6
    assert S.schur_littlewood((0, 0), [F(5), F(7)]) == 1


def test_cauchy_examples():
    assert S.schur_cauchy((0, 1), [1, 2]) == 3
    assert S.schur_cauchy((0, 0), [1, 2]) == 1
    assert S.schur_cauchy((1, 1), [2, 3]) == 6
    with pytest.raises(ValueError):
        S.schur_cauchy((0, 1), [1, 1])


def test_cauchy_bigfloat():
    u = [F(1, 2), F(2, 3), F(3, 4)]
    v = exact_value(S.schur_cauchy((1, 2, 2), u, 128))
    assert abs(v - S.schur_littlewood((1, 2, 2), u)) < F(1, 10 ** 30)


def distinct_rationals(m):
    return st.lists(st.fractions(min_value=F(1, 10), max_value=3, max_denominator=10),
                    min_size=m, max_size=m, unique=True)


@given(st.integers(1, 4).flatmap(lambda m: st.tuples(
    st.sampled_from(list(S.partitions_up_to(6, m))), distinct_rationals(m))))
def test_cauchy_equals_littlewood(case):
    lam, u = case
    assert S.schur_cauchy(lam, u) == S.schur_littlewood(lam, u)


@given(st.integers(1, 4).flatmap(lambda m: st.tuples(
    st.sampled_from(list(S.partitions_up_to(6, m))),
    st.lists(st.fractions(min_value=0, max_value=3, max_denominator=5), min_size=m, max_size=m))))
def test_symmetry_under_permutation(case):
    lam, u = case
    assert S.schur_littlewood(lam, u) == S.schur_littlewood(lam, list(reversed(u)))


@pytest.mark.parametrize("lam", list(partitions()))
def test_principal_specialization(lam):
    m = len(lam)
    for q in (F(2), F(3), F(1, 2)):
        geo = [q ** i for i in range(m)]
        assert S.principal_specialization(lam, q) == S.schur_littlewood(lam, geo)


def test_principal_specialization_examples():
    assert S.principal_specialization((0, 1), F(5)) == 6
    assert S.principal_specialization((0, 0), F(7)) == 1
    assert S.principal_specialization((1, 1), F(2)) == 2
    with pytest.raises(ValueError):
        S.principal_specialization((0, 1, 2), F(1))
    with pytest.raises(ValueError):
        S.principal_specialization((0, 1, 2), F(-1))


@pytest.mark.parametrize("lam", list(partitions()))
def test_vanishing_and_restriction(lam):
    # a zero variable kills the polynomial unless the first part is 0
    u = [F(0)] + [F(k + 2, k + 1) for k in range(len(lam) - 1)]
    val = S.schur_littlewood(lam, u)
    if lam[0] > 0:
        assert val == 0
    else:
        assert val == S.schur_littlewood(lam[1:], u[1:])


def test_first_order_bound_examples():
    assert S.first_order_bounds((0, 1), [1, 1]) == (1, 2)
    assert S.first_order_bounds((0, 0), [F(1, 3), F(2)]) == (1, 1)
    assert S.first_order_bounds((1, 1), [F(1, 2), 1]) == (F(1, 2), F(1, 2))
    with pytest.raises(ValueError):
        S.first_order_bounds((0, 1), [2, 1])


@given(st.integers(1, 4).flatmap(lambda m: st.tuples(
    st.sampled_from(list(S.partitions_up_to(6, m))),
    st.lists(st.fractions(min_value=0, max_value=3, max_denominator=5), min_size=m, max_size=m))))
def test_first_order_bounds_bracket(case):
    lam, u = case
    u = sorted(u)
    lo, hi = S.first_order_bounds(lam, u)
    assert lo <= S.schur_littlewood(lam, u) <= hi
