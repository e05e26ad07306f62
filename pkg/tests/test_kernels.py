import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdebounds import kernels as K

F = Fraction
unit = st.fractions(min_value=0, max_value=1, max_denominator=50)


def test_eval_examples():
    assert K.eval_f(K.gaussian(1), F(0)) == 1
    assert K.eval_f(K.tstudent(1), F(1)) == F(1, 2)
    assert K.eval_f(K.rational_quadratic(2), F(1)) == F(1, 4)


def test_eval_exact_types():
    assert isinstance(K.eval_f(K.cauchy(), F(1, 3)), Fraction)
    assert isinstance(K.eval_f(K.tstudent(2), F(1, 3)), Fraction)
    assert isinstance(K.eval_f(K.gaussian(1), F(1, 3)), mpmath.mpf)


def test_eval_domain():
    for x in (F(-1, 10), F(11, 10)):
        with pytest.raises(K.DomainError):
            K.eval_f(K.cauchy(), x)


def test_parameter_floors():
    with pytest.raises(ValueError):
        K.gaussian(F(1, 2))
    with pytest.raises(ValueError):
        K.rational_quadratic(F(1, 2))


@pytest.mark.parametrize("make", [K.gaussian, K.cauchy, lambda: K.tstudent(2),
                                  lambda: K.rational_quadratic(3), lambda: K.reflected_rq(1)])
@given(x=unit)
def test_values_in_unit_interval(make, x):
    v = K.eval_f(make(), x, 64)
    assert 0 <= v <= 1


def test_scale_to_unit():
    base = K.gaussian(1)
    with mpmath.workprec(128):
        assert abs(K.eval_f(K.scale_to_unit(base, 2), F(1), 128) - mpmath.exp(-2)) < 1e-30
        assert abs(K.eval_f(K.gaussian(4), F(1, 2), 128) - mpmath.exp(-2)) < 1e-30
    with pytest.raises(ValueError):
        K.scale_to_unit(base, 0)


@given(x=unit)
def test_scale_identity(x):
    f = K.cauchy()
    assert K.eval_f(K.scale_to_unit(f, 1), x) == K.eval_f(f, x)


@given(x=st.fractions(min_value=0, max_value=F(1, 3), max_denominator=40))
def test_scale_matches_coordinate_rescale(x):
    # f_B(|x|^2) equals f(|sqrt(B) x|^2)
    f = K.rational_quadratic(2)
    assert K.eval_f(K.scale_to_unit(f, 3), x) == K.eval_f(f, 3 * x)


def test_taylor_examples():
    assert K.taylor_coeff(K.gaussian(1), 2) == F(1, 2)
    for k in range(12):
        assert K.taylor_coeff(K.reflected_rq(1), k) == F(1, 2 ** (k + 1))


def test_geometric_reflection():
    # (2 - x)^-1 around c = 1 is 1/(1 - h) = sum h^k
    g = K.reflect(K.cauchy())
    with mpmath.workprec(64):
        for k in range(8):
            assert K.taylor_coeff(g, k, F(1)) == 1


def test_reflect_examples():
    assert K.reflect(K.rational_quadratic(3)) == K.reflected_rq(3)
    assert K.reflect(K.constant()) == K.constant()
    g = K.reflect(K.gaussian(2))
    with mpmath.workprec(128):
        x = F(1, 3)
        expect = mpmath.exp(-2) * mpmath.exp(2 * mpmath.mpf(1) / 3)
        assert abs(K.eval_f(g, x, 128) - expect) < 1e-30
    with pytest.raises(ValueError):
        K.reflect(K.tstudent(2))


@pytest.mark.parametrize("f", [K.cauchy(), K.rational_quadratic(2), K.gaussian(3)])
@pytest.mark.parametrize("c", [F(0), F(1, 4), F(1, 2)])
def test_reflection_absolutely_monotone(f, c):
    g = K.reflect(f)
    for n in range(21):
        assert K.taylor_coeff(g, n, c, 96) >= 0


@pytest.mark.parametrize("f", [K.cauchy(), K.rational_quadratic(2), K.tstudent(1)])
def test_completely_monotone_signs(f):
    for t in (F(0), F(1, 3), F(1)):
        for k in range(11):
            coeff = K.taylor_coeff(f, k, t)
            assert isinstance(coeff, Fraction)
            assert (-1) ** k * coeff >= 0


def test_tstudent_rho2_not_completely_monotone():
    f = K.tstudent(2)
    assert not f.completely_monotone
    # 1/(1+x^2) at 0: coefficient of x^1 is 0, of x^2 is -1, of x^4 is +1
    assert [K.taylor_coeff(f, k) for k in range(5)] == [1, 0, -1, 0, 1]


def _tail(f, c, h, n0=31, n1=400):
    with mpmath.workprec(128):
        return sum(abs(K.taylor_coeff(f, n, c, 128)) * abs(h) ** n for n in range(n0, n1))


@pytest.mark.parametrize("f,c", [
    (K.gaussian(2), F(0)),
    (K.gaussian(1), F(1, 2)),
    (K.rational_quadratic(2), F(1, 2)),
    (K.cauchy(), F(1, 2)),
    (K.reflected_rq(1), F(1, 2)),
])
def test_taylor_series_against_values(f, c):
    # inside the disc of convergence the degree-30 truncation misses only the tail
    coeffs = [K.taylor_coeff(f, n, c, 128) for n in range(31)]
    with mpmath.workprec(128):
        for k in range(20):
            x = F(k, 19)
            h = K._mp(x - c)
            approx = sum(a * h ** n for n, a in enumerate(coeffs))
            exact = K.eval_f(f, x, 128)
            assert abs(approx - exact) <= 2 * _tail(f, c, h) + mpmath.mpf(10) ** -30


def test_gaussian_tail_bound_closed_form():
    # for e^{-Bx} at c = 0 the tail after degree 30 is at most B^31 / 31!
    f = K.gaussian(1)
    with mpmath.workprec(128):
        approx = sum(K.taylor_coeff(f, n, F(0), 128) for n in range(31))
        assert abs(approx - mpmath.exp(-1)) <= mpmath.mpf(1) / math.factorial(31)


def test_non_integer_rho_routes_to_bigfloat():
    f = K.tstudent(F(3, 2))
    assert not f.exact
    v = K.eval_f(f, F(1, 4), 96)
    with mpmath.workprec(96):
        assert abs(v - 1 / (1 + mpmath.mpf(1) / 8)) < 1e-25
    with pytest.raises(K.NoTaylorExpansion):
        K.taylor_coeff(f, 3, F(0))


@pytest.mark.parametrize("text,expect", [
    ("gaussian:B=2", K.gaussian(2)),
    ("rq:sigma=3", K.rational_quadratic(3)),
    ("tstudent:rho=2", K.tstudent(2)),
    ("cauchy", K.cauchy()),
    ("reflected-rq:sigma=1", K.reflected_rq(1)),
])
def test_parse_kernel(text, expect):
    assert K.parse_kernel(text) == expect


@pytest.mark.parametrize("text", ["bogus", "gaussian:B", "rq:rho=1", "gaussian:B=x"])
def test_parse_kernel_errors(text):
    with pytest.raises(ValueError):
        K.parse_kernel(text)
