import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdebounds import kernels as K
from kdebounds import solvers as SV

F = Fraction


def points(seed, n, m):
    return np.random.default_rng(seed).random((n, m)) / math.sqrt(m)


def loop_kde(X, Y, u, fn):
    """Reference: one scalar kernel evaluation per pair."""
    return [sum(fn(sum((a - b) ** 2 for a, b in zip(x, y))) * w for y, w in zip(Y, u))
            for x in X]


REFERENCE = [
    (K.gaussian(1), lambda t: math.exp(-t)),
    (K.gaussian(3), lambda t: math.exp(-3 * t)),
    (K.cauchy(), lambda t: 1 / (1 + t)),
    (K.rational_quadratic(2), lambda t: (1 + t) ** -2),
    (K.tstudent(2), lambda t: 1 / (1 + t * t)),
    (K.reflected_rq(1), lambda t: 1 / (2 - t)),
]


@pytest.mark.parametrize("f,fn", REFERENCE)
def test_naive_matches_double_loop(f, fn):
    X, Y = points(1, 9, 3), points(2, 7, 3)
    u = np.random.default_rng(3).normal(size=7)
    np.testing.assert_allclose(SV.naive_kde(X, Y, u, f), loop_kde(X, Y, u, fn), rtol=1e-12)


def test_naive_examples():
    x, y = [[0.1, 0.2]], [[0.4, 0.6]]
    assert SV.naive_kde(x, y, [2.0], K.cauchy())[0] == pytest.approx(2 / 1.25)
    assert not SV.naive_kde(points(0, 4, 2), points(1, 5, 2), np.zeros(5), K.gaussian(1)).any()
    X = [[0.0, 0.0], [0.5, 0.5]]
    Y = [[0.0, 0.5], [0.5, 0.0]]
    want = [math.exp(-0.25) * 3, math.exp(-0.25) * 3]
    np.testing.assert_allclose(SV.naive_kde(X, Y, [1.0, 2.0], K.gaussian(1)), want)


def test_naive_domain_and_shapes():
    with pytest.raises(K.DomainError):
        SV.naive_kde([[0.0]], [[1.5]], [1.0], K.gaussian(1))
    with pytest.raises(ValueError):
        SV.naive_kde([[0.0]], [[0.5]], [1.0, 1.0], K.gaussian(1))


def test_kernel_matrix_path():
    # a scaled kernel has no native code and goes through the dense matrix
    f = K.scale_to_unit(K.cauchy(), 2)
    X, Y = points(4, 5, 2), points(5, 6, 2)
    u = np.ones(6)
    np.testing.assert_allclose(SV.naive_kde(X, Y, u, f), loop_kde(X, Y, u, lambda t: 1 / (1 + 2 * t)))


def test_sample_size():
    assert SV.sample_size(10, 0.5) == math.ceil(2 * math.log(200) / 0.25)


def test_sampling_falls_back_to_exact():
    X, Y = points(0, 20, 3), points(1, 20, 3)
    u = np.ones(20)
    v, S = SV.sampling_kde(X, Y, u, K.gaussian(1), 0.1, seed=4)
    assert S == 20
    np.testing.assert_array_equal(v, SV.naive_kde(X, Y, u, K.gaussian(1)))


def test_sampling_seeded_and_within_eps():
    n, eps = 2000, 0.3
    X, Y = points(7, 50, 3), points(8, n, 3)
    u = np.random.default_rng(9).normal(size=n)
    exact = SV.naive_kde(X, Y, u, K.gaussian(2))
    norm = np.abs(u).sum()
    for seed in range(100):
        v, S = SV.sampling_kde(X, Y, u, K.gaussian(2), eps, seed)
        assert S < n
        assert np.abs(v - exact).max() <= eps * norm
    a, _ = SV.sampling_kde(X, Y, u, K.gaussian(2), eps, 17)
    b, _ = SV.sampling_kde(X, Y, u, K.gaussian(2), eps, 17)
    assert a.tobytes() == b.tobytes()


def test_sampling_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        SV.sampling_kde([[0.0]], [[0.0]], [1.0], K.gaussian(1), 0)


def test_fit_constant_kernel():
    p = SV.fit_polynomial(K.constant(), eps=1e-3)
    assert p.constant_kernel and p.degree == 1 and p.coeffs == (1, 0)
    assert p.certified_eps == 0


@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4, 1e-6, 1e-8])
def test_cauchy_degree_is_logarithmic(eps):
    p = SV.fit_polynomial(K.cauchy(), eps=eps)
    assert p.degree <= 4 * math.ceil(math.log2(1 / eps))
    assert p.certified_eps <= eps
    # the extrema already include both endpoints
    assert p.grid_size == 10 * p.degree + 100


@pytest.mark.parametrize("f", [K.gaussian(1), K.cauchy(), K.rational_quadratic(2)])
def test_degree_monotone_in_eps(f):
    degs = [SV.fit_polynomial(f, eps=e).degree for e in (1e-2, 1e-3, 1e-6)]
    assert degs == sorted(degs)


def test_fit_is_minimal():
    p = SV.fit_polynomial(K.gaussian(1), eps=1e-6)
    worse = SV._try_degree(K.gaussian(1), p.degree - 1)
    assert worse[1] > 1e-6


@pytest.mark.parametrize("f,B", [(K.gaussian(1), 1), (K.cauchy(), 1), (K.gaussian(1), 4)])
def test_fit_residual_on_fine_grid(f, B):
    eps = 1e-5
    p = SV.fit_polynomial(f, B, eps)
    g = K.scale_to_unit(f, B) if B != 1 else f
    xs = np.linspace(0, 1, 3001)
    want = np.array([float(K.eval_f(g, F(x), 64)) for x in xs])
    # the certification grid is a heuristic; allow a little slack between grid points
    assert np.abs(p(xs) - want).max() <= 2 * eps


def test_degree_cap():
    with pytest.raises(SV.DegreeCapExceeded):
        SV.fit_polynomial(K.gaussian(1), 64, 1e-8, cap=4)
    with pytest.raises(ValueError):
        SV.fit_polynomial(K.cauchy(), eps=1.5)


def _poly(coeffs):
    return SV.ApproxPolynomial(K.constant(), len(coeffs) - 1, tuple(map(F, coeffs)), 0.0, 0, 0.0)


def test_feature_examples():
    X, Y = points(0, 3, 1), points(1, 4, 1)
    fac = SV.build_feature_maps(_poly([1, 2]), X, Y, "monomial")
    assert fac.size == 4 <= SV.feature_bound(1, 1) == 6
    assert {k for k in fac.T} == {((0,), (0,)), ((2,), (0,)), ((0,), (2,)), ((1,), (1,))}
    assert SV.build_feature_maps(_poly([3]), X, Y, "monomial").size == 1
    assert SV.build_feature_maps(_poly([3]), X, Y).size == 1
    X2, Y2 = points(2, 3, 2), points(3, 3, 2)
    for strategy in ("monomial", "grouped"):
        assert SV.build_feature_maps(_poly([1, -1]), X2, Y2, strategy).size <= 15


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=8), min_size=1, max_size=5),
       st.integers(1, 3), st.integers(0, 1000))
def test_factorization_reproduces_polynomial(coeffs, m, seed):
    X, Y = points(seed, 5, m), points(seed + 1, 6, m)
    p = _poly(coeffs)
    d2 = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(-1)
    want = p(d2)
    for strategy in ("grouped", "monomial"):
        fac = SV.build_feature_maps(p, X, Y, strategy)
        assert fac.size <= SV.feature_bound(m, len(coeffs) - 1)
        np.testing.assert_allclose(fac.Phi @ fac.Psi, want, atol=1e-10)


def test_grouped_is_smaller():
    p = SV.fit_polynomial(K.cauchy(), eps=1e-3)
    X, Y = points(0, 4, 3), points(1, 4, 3)
    g = SV.build_feature_maps(p, X, Y, "grouped")
    mono = SV.build_feature_maps(p, X, Y, "monomial")
    assert g.size <= mono.size <= SV.feature_bound(3, p.degree)


def test_memory_guard():
    p = SV.fit_polynomial(K.gaussian(1), eps=1e-6)
    with pytest.raises(SV.MemoryGuard):
        SV.build_feature_maps(p, points(0, 2, 6), points(1, 2, 6), cap=10)
    with pytest.raises(ValueError):
        SV.build_feature_maps(p, points(0, 2, 2), points(1, 2, 2), "bogus")


def test_poly_kde_examples():
    X, Y = points(0, 6, 2), points(1, 7, 2)
    p = SV.fit_polynomial(K.gaussian(1), eps=1e-4)
    assert not SV.poly_kde(X, Y, np.zeros(7), p).any()
    const = SV.fit_polynomial(K.constant(), eps=1e-3)
    u = np.arange(7.0)
    np.testing.assert_allclose(SV.poly_kde(X, Y, u, const), SV.naive_kde(X, Y, u, K.constant()))


@pytest.mark.parametrize("f", [K.gaussian(1), K.cauchy(), K.rational_quadratic(2)])
def test_poly_kde_within_eps(f):
    X, Y = points(10, 64, 4), points(11, 64, 4)
    u = np.random.default_rng(12).normal(size=64)
    p = SV.fit_polynomial(f, eps=1e-4)
    err = np.abs(SV.poly_kde(X, Y, u, p) - SV.naive_kde(X, Y, u, f)).max()
    assert err <= 1e-4 * np.abs(u).sum()


def test_float_oracle_solvers():
    from kdebounds import reductions as R
    from kdebounds import counting as C
    inst = R.BCPInstance.hamming([(0, 1, 1), (1, 1, 0)], [(0, 0, 1), (1, 1, 1)])
    spec = C.tstudent_spec(4)
    lifted = R.lift_points(inst, 2, spec)
    exact = [float(v) for v in R.ExactOracle(K.tstudent(1))(lifted, [1, 1], 0)]
    for solver in ("naive", "sampling", "poly"):
        got = SV.FloatOracle(K.tstudent(1), solver)(lifted, [1, 1], 1e-3)
        assert np.abs(np.array(got) - exact).max() <= 2e-3


class _Base:
    def __call__(self, lifted, u, eps):
        return [F(1), F(2)]


def test_noisy_oracle_modes():
    base = _Base()
    assert SV.noisy_oracle(base, eps=0)(None, [1, 1], 0) == [1, 2]
    out = SV.noisy_oracle(base, eps=F(1, 10))(None, [1, -1], 0)
    assert out == [F(6, 5), F(11, 5)]
    out = SV.noisy_oracle(base, eps=F(1, 10), signs={None: -1})(None, [1, 1], 0)
    assert out == [F(4, 5), F(9, 5)]
    a = SV.noisy_oracle(base, eps=F(1, 10), mode="random", seed=3)(None, [1, 1], 0)
    b = SV.noisy_oracle(base, eps=F(1, 10), mode="random", seed=3)(None, [1, 1], 0)
    assert a == b and all(abs(x - y) <= F(1, 5) for x, y in zip(a, [1, 2]))
    with pytest.raises(ValueError):
        SV.noisy_oracle(base, mode="loud")
