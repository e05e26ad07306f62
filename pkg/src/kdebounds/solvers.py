"""KDE solvers sharing the oracle interface ``(lifted, u, eps) -> v``.

* :func:`naive_kde` computes ``K u`` directly in float64.
* :func:`sampling_kde` averages over a Hoeffding-sized weighted sample.
* :func:`poly_kde` replaces ``f`` by a fitted polynomial and factors the
  kernel matrix through low-degree features, so ``K u ~ Phi (Psi u)``.

:func:`noisy_oracle` wraps any oracle with error at the edge of its
``eps * |u|_1`` allowance, for probing the reductions.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb, factorial
from typing import Sequence

import mpmath
import numpy as np
from numpy.polynomial import chebyshev as C

from . import _backend
from . import kernels as K
from .numerics import DEFAULT_PREC, exact_value, to_scalar

DEGREE_CAP = 512
FEATURE_CAP = 2_000_000


class DegreeCapExceeded(RuntimeError):
    pass


class MemoryGuard(MemoryError):
    """The feature index set would exceed the configured cap."""


# --- float kernel evaluation ----------------------------------------------

_CODES = {"gaussian": _backend.GAUSSIAN, "rq": _backend.RQ, "cauchy": _backend.RQ,
          "tstudent": _backend.TSTUDENT, "constant": _backend.CONSTANT}


def _native(f: K.KernelDescriptor):
    """``(code, scale, param)`` for the compiled mat-vec, or None."""
    if f.base is not None or f.family not in _CODES:
        return None
    param = {"rq": "sigma", "cauchy": "sigma", "tstudent": "rho"}.get(f.family)
    value = float(f.param[param]) if param else 0.0
    return _CODES[f.family], float(f.scale), value


def _as_float(a) -> np.ndarray:
    return np.atleast_2d(np.asarray(a, dtype=np.float64))


def kernel_matrix(X, Y, f: K.KernelDescriptor) -> np.ndarray:
    """Dense ``K[i, j] = f(|x_i - y_j|^2)`` in float64 (tests and small n only)."""
    X, Y = _as_float(X), _as_float(Y)
    d = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(-1)
    if d.size and (d.min() < 0 or d.max() > 1 + 1e-12):
        raise K.DomainError("squared distances must lie in [0, 1]")
    vals = {}
    out = np.empty_like(d)
    for idx, x in np.ndenumerate(np.minimum(d, 1.0)):
        if x not in vals:
            vals[x] = float(K.eval_f(f, Fraction(x), 64))
        out[idx] = vals[x]
    return out


def naive_kde(X, Y, u, f: K.KernelDescriptor) -> np.ndarray:
    """``K u`` by the direct double loop."""
    X, Y = _as_float(X), _as_float(Y)
    u = np.asarray(u, dtype=np.float64)
    if X.shape[1] != Y.shape[1]:
        raise ValueError("X and Y have different dimensions")
    if len(u) != Y.shape[0]:
        raise ValueError("one weight per point of Y is required")
    _check_domain(X, Y)
    code = _native(f)
    if code is None:
        return kernel_matrix(X, Y, f) @ u
    return _backend.kde_matvec(X, Y, u, *code)


def _check_domain(X, Y, tol=1e-12):
    span = np.vstack([X, Y])
    # diameter bound without forming all pairs: |x - y|^2 <= sum of squared ranges
    if ((span.max(0) - span.min(0)) ** 2).sum() <= 1 + tol:
        return
    X0, Y0 = X[:, None, :], Y[None, :, :]
    if ((X0 - Y0) ** 2).sum(-1).max() > 1 + tol:
        raise K.DomainError("squared distances must lie in [0, 1]; rescale the points")


# --- sampling ----------------------------------------------------------------

def sample_size(n: int, eps: float) -> int:
    """``ceil(2 ln(2 n^2) / eps^2)``: two-sided Hoeffding at failure rate ``1/n^2``."""
    return math.ceil(2 * math.log(2 * n * n) / (eps * eps))


def sampling_kde(X, Y, u, f: K.KernelDescriptor, eps: float, seed: int = 0):
    """Importance-sample ``y_j`` with probability ``|u_j| / |u|_1``.

    Returns ``(v, S)``.  When ``S >= n`` the exact answer is returned.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    X, Y = _as_float(X), _as_float(Y)
    u = np.asarray(u, dtype=np.float64)
    n = Y.shape[0]
    S = sample_size(max(n, 2), eps)
    norm = np.abs(u).sum()
    if S >= n or norm == 0:
        return naive_kde(X, Y, u, f), min(S, n)
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=S, replace=True, p=np.abs(u) / norm)
    w = np.sign(u[idx]) * (norm / S)
    return naive_kde(X, Y[idx], w, f), S


# --- polynomial fit ----------------------------------------------------------

@dataclass(frozen=True)
class ApproxPolynomial:
    """``p(x) = sum coeffs[k] x^k`` approximating ``kernel`` on [0, 1]."""

    kernel: K.KernelDescriptor
    degree: int
    coeffs: tuple
    certified_eps: float
    grid_size: int
    target_eps: float
    constant_kernel: bool = False

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, [float(c) for c in self.coeffs])

    def float_coeffs(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])


def _f_on_unit(f: K.KernelDescriptor, prec: int):
    def g(x):
        return K.eval_f(f, x, prec)
    return g


def _cheb_coeffs(f: K.KernelDescriptor, d: int) -> np.ndarray:
    """Chebyshev interpolant of ``f`` on [0, 1] at the ``d+1`` first-kind nodes."""
    g = _f_on_unit(f, 64)

    def fn(t):
        return np.array([float(g(Fraction(float(s)) / 2 + Fraction(1, 2))) for s in np.atleast_1d(t)])

    return C.chebinterpolate(fn, d)


def _shifted_cheb_monomials(d: int) -> list[list[Fraction]]:
    """Integer monomial coefficients of ``T_k(2x - 1)`` for k = 0..d."""
    out = [[Fraction(1)], [Fraction(-1), Fraction(2)]]
    for k in range(2, d + 1):
        a, b = out[k - 1], out[k - 2]
        nxt = [Fraction(0)] * (k + 1)
        for i, c in enumerate(a):
            nxt[i] -= 2 * c
            nxt[i + 1] += 4 * c
        for i, c in enumerate(b):
            nxt[i] -= c
        out.append(nxt)
    return out[: d + 1]


def _to_monomial(cheb: np.ndarray) -> tuple[Fraction, ...]:
    d = len(cheb) - 1
    basis = _shifted_cheb_monomials(max(d, 1))
    coeffs = [Fraction(0)] * (d + 1)
    for k, ck in enumerate(cheb):
        ck = Fraction(float(ck))
        for i, b in enumerate(basis[k]):
            coeffs[i] += ck * b
    return tuple(coeffs)


def certification_grid(d: int) -> list[Fraction]:
    """``10 d + 100`` Chebyshev extrema mapped to [0, 1], plus both endpoints."""
    N = 10 * d + 100
    with mpmath.workprec(128):
        pts = {Fraction(0), Fraction(1)}
        for k in range(N):
            t = mpmath.cos(mpmath.pi * k / (N - 1))
            pts.add(exact_value((1 + t) / 2))
    return sorted(p for p in pts if 0 <= p <= 1)


def _residual(f: K.KernelDescriptor, coeffs: Sequence[Fraction], grid) -> float:
    # monomial coefficients of T_d(2x - 1) reach about 2^(2.6 d); keep headroom
    prec = 128 + 3 * len(coeffs)
    worst = mpmath.mpf(0)
    with mpmath.workprec(prec):
        cs = [mpmath.mpf(c.numerator) / c.denominator for c in coeffs]
        for x in grid:
            xm = mpmath.mpf(x.numerator) / x.denominator
            acc = mpmath.mpf(0)
            for c in reversed(cs):
                acc = acc * xm + c
            worst = max(worst, abs(acc - K.eval_f(f, x, prec)))
    return float(worst)


def _try_degree(f, d):
    coeffs = _to_monomial(_cheb_coeffs(f, d))
    grid = certification_grid(d)
    return coeffs, _residual(f, coeffs, grid), len(grid)


def fit_polynomial(f: K.KernelDescriptor, B=1, eps: float = 1e-3,
                   cap: int = DEGREE_CAP) -> ApproxPolynomial:
    """Smallest-degree Chebyshev interpolant of ``x -> f(B x)`` within ``eps`` on [0, 1].

    Degrees are searched by doubling and then bisection; the residual is
    measured in 128-bit arithmetic on :func:`certification_grid`.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    g = f if B == 1 else K.scale_to_unit(f, B)
    if g.family == "constant":
        coeffs = (Fraction(1), Fraction(0))
        grid = certification_grid(1)
        return ApproxPolynomial(g, 1, coeffs, _residual(g, coeffs, grid), len(grid), eps, True)
    tried: dict[int, tuple] = {}

    def ok(d):
        if d not in tried:
            tried[d] = _try_degree(g, d)
        return tried[d][1] <= eps

    hi = 1
    while not ok(hi):
        if hi >= cap:
            raise DegreeCapExceeded(f"no interpolant of degree <= {cap} reaches eps={eps}")
        hi = min(2 * hi, cap)
    lo = hi // 2 + 1 if hi > 1 else 1
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    coeffs, res, size = tried[hi]
    return ApproxPolynomial(g, hi, coeffs, res, size, eps)


# --- feature maps ------------------------------------------------------------

@dataclass(frozen=True)
class FeatureFactorization:
    """``P = Phi @ Psi`` approximating the kernel matrix entrywise."""

    T: tuple
    Phi: np.ndarray
    Psi: np.ndarray
    center: np.ndarray
    strategy: str

    @property
    def size(self) -> int:
        return len(self.T)


def feature_bound(m: int, d: int) -> int:
    """``C(2m + 2d, 2m)``: monomials of degree ``<= 2d`` in ``2m`` variables."""
    return comb(2 * m + 2 * d, 2 * m)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _monomial_terms(coeffs: Sequence[Fraction], m: int) -> dict:
    """Exponent pairs ``(a, b) -> c`` with ``p(|u - v|^2) = sum c u^a v^b``."""
    terms: dict[tuple, Fraction] = {}
    for j, cj in enumerate(coeffs):
        if cj == 0:
            continue
        for kappa in _compositions(j, m):
            multi = Fraction(factorial(j))
            for k in kappa:
                multi /= factorial(k)
            # (u_k - v_k)^(2 kappa_k) = sum_a C(2 kappa_k, a) u_k^a (-v_k)^(2 kappa_k - a)
            per_coord = []
            for k in kappa:
                per_coord.append([(a, 2 * k - a, comb(2 * k, a) * (-1) ** (2 * k - a))
                                  for a in range(2 * k + 1)])
            for choice in _product(per_coord):
                a = tuple(c[0] for c in choice)
                b = tuple(c[1] for c in choice)
                w = cj * multi
                for c in choice:
                    w *= c[2]
                terms[(a, b)] = terms.get((a, b), Fraction(0)) + w
    return {k: v for k, v in terms.items() if v != 0}


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for tail in _product(lists[1:]):
            yield (head,) + tail


def _monomials(P: np.ndarray, exps: Sequence[tuple]) -> np.ndarray:
    E = np.array(exps, dtype=np.int64).reshape(len(exps), P.shape[1])
    return np.prod(P[:, None, :] ** E[None, :, :], axis=2)


def _grouped_terms(coeffs: Sequence[Fraction], m: int) -> list:
    """Terms ``(i, k, a, c)`` of ``p(|u|^2 + |v|^2 - 2 <u, v>)``.

    Each contributes ``c |u|^(2i) u^a * |v|^(2k) v^a``; the inner-product
    power is expanded over multisets ``a`` with ``|a| = j``.
    """
    d = len(coeffs) - 1
    out = []
    by_key: dict[tuple, Fraction] = {}
    for e, ce in enumerate(coeffs):
        if ce == 0:
            continue
        for i in range(e + 1):
            for k in range(e - i + 1):
                j = e - i - k
                tri = Fraction(factorial(e), factorial(i) * factorial(k) * factorial(j))
                base = ce * tri * (-2) ** j
                for combo in combinations_with_replacement(range(m), j):
                    a = [0] * m
                    for t in combo:
                        a[t] += 1
                    multi = Fraction(factorial(j))
                    for t in a:
                        multi /= factorial(t)
                    key = (i, k, tuple(a))
                    by_key[key] = by_key.get(key, Fraction(0)) + base * multi
    for key in sorted(by_key):
        if by_key[key] != 0:
            out.append(key + (by_key[key],))
    assert all(i + k + sum(a) <= d for i, k, a, _ in out)
    return out


def grouped_size(m: int, d: int) -> int:
    """Index-set size of the grouped strategy before zero-dropping."""
    return sum(comb(m + j - 1, j) * comb(d - j + 2, 2) for j in range(d + 1))


def build_feature_maps(p: ApproxPolynomial, X, Y, strategy: str = "grouped",
                       cap: int = FEATURE_CAP) -> FeatureFactorization:
    """Factor ``p(|x_i - y_j|^2)`` as ``Phi @ Psi``.

    ``strategy="monomial"`` expands into monomials ``u^a v^b`` exactly as
    written; ``"grouped"`` keeps ``|u|^2`` and ``|v|^2`` whole and only
    expands ``<u, v>^j``, giving far fewer columns for the same polynomial.
    Both respect ``|T| <= C(2m + 2d, 2m)``.  Points are centered first.
    """
    X, Y = _as_float(X), _as_float(Y)
    m = X.shape[1]
    d = len(p.coeffs) - 1
    center = (np.vstack([X, Y]).max(0) + np.vstack([X, Y]).min(0)) / 2
    Xc, Yc = X - center, Y - center
    if strategy == "monomial":
        if sum(1 for _ in _compositions(d, m)) * (2 * d + 1) ** min(m, d) > 50 * cap:
            raise MemoryGuard(f"monomial expansion for m={m}, d={d} is too large")
        terms = _monomial_terms(p.coeffs, m)
        if len(terms) > cap:
            raise MemoryGuard(f"|T| = {len(terms)} exceeds cap {cap}")
        keys = sorted(terms)
        c = np.array([float(terms[k]) for k in keys])
        Phi = _monomials(Xc, [k[0] for k in keys]) * c[None, :]
        Psi = _monomials(Yc, [k[1] for k in keys]).T
        return FeatureFactorization(tuple(keys), Phi, Psi, center, strategy)
    if strategy != "grouped":
        raise ValueError(f"unknown strategy {strategy!r}")
    if grouped_size(m, d) > cap:
        raise MemoryGuard(f"|T| up to {grouped_size(m, d)} exceeds cap {cap}")
    terms = _grouped_terms(p.coeffs, m)
    nx, ny = (Xc * Xc).sum(1), (Yc * Yc).sum(1)
    exps = [t[2] for t in terms]
    c = np.array([float(t[3]) for t in terms])
    i_pow = np.array([t[0] for t in terms])
    k_pow = np.array([t[1] for t in terms])
    Phi = _monomials(Xc, exps) * nx[:, None] ** i_pow[None, :] * c[None, :]
    Psi = (_monomials(Yc, exps) * ny[:, None] ** k_pow[None, :]).T
    keys = tuple((t[0], t[1], t[2]) for t in terms)
    return FeatureFactorization(keys, Phi, Psi, center, strategy)


def poly_kde(X, Y, u, p: ApproxPolynomial, strategy: str = "grouped",
             factorization: FeatureFactorization | None = None) -> np.ndarray:
    """``Phi (Psi u)`` for the factorization of ``p``."""
    X, Y = _as_float(X), _as_float(Y)
    _check_domain(X, Y)
    fac = factorization or build_feature_maps(p, X, Y, strategy)
    return fac.Phi @ (fac.Psi @ np.asarray(u, dtype=np.float64))


# --- oracle adapters ---------------------------------------------------------

class FloatOracle:
    """Run a float solver on the explicit coordinates of a lifted instance."""

    serial = False

    def __init__(self, f: K.KernelDescriptor, solver: str = "naive", seed: int = 0):
        self.f, self.solver, self.seed = f, solver, seed

    def __call__(self, lifted, u, eps):
        X, Y = lifted.float_points()
        if self.solver == "naive":
            return list(naive_kde(X, Y, u, self.f))
        if self.solver == "sampling":
            return list(sampling_kde(X, Y, u, self.f, float(eps), self.seed)[0])
        if self.solver == "poly":
            return list(poly_kde(X, Y, u, fit_polynomial(self.f, 1, float(eps))))
        raise ValueError(f"unknown solver {self.solver!r}")


class NoisyOracle:
    """``base`` plus a perturbation of size ``eps * |u|_1`` per entry.

    ``mode="adversarial"`` offsets every entry by exactly ``+-eps |u|_1``
    with the sign chosen per lifted row from ``signs`` (default +1);
    ``mode="random"`` draws each offset uniformly from the allowed band.
    ``scale`` multiplies the magnitude, to step outside the contract.
    """

    serial = True

    def __init__(self, base, eps=None, mode: str = "adversarial", seed: int = 0,
                 signs: dict | None = None, scale=1):
        if mode not in ("adversarial", "random"):
            raise ValueError(f"unknown noise mode {mode!r}")
        self.base, self.eps, self.mode = base, eps, mode
        self.signs = signs or {}
        self.scale = scale
        self.rng = random.Random(seed)

    def __call__(self, lifted, u, eps):
        eps = self.eps if self.eps is not None else eps
        v = self.base(lifted, u, eps)
        prec = getattr(lifted, "prec", None)
        exact = prec is None and all(isinstance(x, (int, Fraction)) for x in v)
        with mpmath.workprec(prec or DEFAULT_PREC):
            if exact:
                eps_s = Fraction(eps)
                norm = sum(abs(Fraction(w)) for w in u)
            else:
                eps_s = to_scalar(eps if not isinstance(eps, float) else Fraction(eps), prec or DEFAULT_PREC)
                norm = sum(abs(to_scalar(w, prec or DEFAULT_PREC)) for w in u)
            band = self.scale * eps_s * norm
            if self.mode == "adversarial":
                s = self.signs.get(getattr(lifted, "index", None), 1)
                return [x + s * band for x in v]
            out = []
            for x in v:
                r = Fraction(self.rng.randint(-(1 << 30), 1 << 30), 1 << 30)
                out.append(x + (r * band if exact else to_scalar(r, prec or DEFAULT_PREC) * band))
            return out


def noisy_oracle(base, eps=None, mode: str = "adversarial", seed: int = 0,
                 signs: dict | None = None, scale=1) -> NoisyOracle:
    return NoisyOracle(base, eps, mode, seed, signs, scale)
