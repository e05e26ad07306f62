"""Counting matrices ``M[l, p] = f(c + alpha_l * beta_p)`` and their inverse norms.

Per-kernel constructions (Gaussian, t-Student, reflected Rational Quadratic)
come with the closed-form bounds on ``tau(M)`` they are meant to certify,
plus the determinant identities used in those bounds: the Cauchy
determinant, its minor ratio, and the Cauchy-Binet expansion over Schur
polynomials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from . import kernels as K
from .numerics import (
    DEFAULT_PREC,
    Matrix,
    Scalar,
    check_prec,
    exact_value,
    det,
    inverse,
    is_exact,
    tau,
    tau_coarse,
    to_scalar,
    vandermonde,
)
from .schur import partitions_of, schur_cauchy, shifted


@dataclass(frozen=True)
class CountingMatrixSpec:
    """Parameters of a counting matrix.

    ``D`` is the distance cap the matrix serves; the matrix itself is
    ``len(alpha) x len(beta)`` (``D+1`` square for the Gaussian layout that
    keeps the ``p = 0`` row).  ``analysis`` optionally stores the
    analysis-convenient vectors ``(alpha', beta', s)`` with
    ``alpha = alpha' / s`` and ``beta = s * beta'``.
    """

    D: int
    kernel: K.KernelDescriptor
    alpha: tuple
    beta: tuple
    c: Scalar = Fraction(0)
    prec: int | None = None
    analysis: tuple | None = None

    def __post_init__(self):
        check_prec(self.prec)
        if self.prec is None and not (
            self.kernel.exact and all(map(is_exact, self.alpha + self.beta + (self.c,)))
        ):
            raise ValueError("exact mode needs an exact kernel and rational alpha, beta, c")
        if len(set(self.alpha)) != len(self.alpha):
            raise ValueError("alpha entries must be pairwise distinct")
        if len(set(self.beta)) != len(self.beta):
            raise ValueError("beta entries must be pairwise distinct")
        with mpmath.workprec(self.prec or DEFAULT_PREC):
            for a in self.alpha:
                for b in self.beta:
                    x = self.c + a * b
                    if x < 0 or x > 1:
                        raise K.DomainError(
                            f"c + alpha*beta = {mpmath.nstr(x, 8) if not is_exact(x) else x} outside [0, 1]"
                        )

    @property
    def size(self) -> int:
        return len(self.alpha)

    @property
    def beta_is_identity(self) -> bool:
        return all(b == p for b, p in zip(self.beta, self.index_set))

    @property
    def index_set(self) -> tuple[int, ...]:
        """Distance values p addressed by the columns (0..D or 1..D)."""
        start = 0 if self.size == self.D + 1 else 1
        return tuple(range(start, start + len(self.beta)))


def build(spec: CountingMatrixSpec) -> Matrix:
    """``M[l, p] = f(c + alpha_l * beta_p)``."""
    rows = []
    with mpmath.workprec(spec.prec or DEFAULT_PREC):
        for a in spec.alpha:
            rows.append([K.eval_f(spec.kernel, spec.c + a * b, spec.prec) for b in spec.beta])
    return Matrix.from_rows(rows, spec.prec)


def build_analysis(spec: CountingMatrixSpec) -> Matrix:
    """The same matrix built from the stored analysis-scale vectors."""
    if spec.analysis is None:
        raise ValueError("spec carries no analysis vectors")
    a2, b2, _ = spec.analysis
    rows = [[K.eval_f(spec.kernel, spec.c + a * b, spec.prec) for b in b2] for a in a2]
    return Matrix.from_rows(rows, spec.prec)


@dataclass(frozen=True)
class TauCertificate:
    D: int
    tau: Scalar
    tau_coarse: Scalar
    bound: Scalar

    @property
    def ratio(self):
        with mpmath.workprec(DEFAULT_PREC):
            return to_scalar(self.tau, DEFAULT_PREC) / self.bound

    @property
    def holds(self) -> bool:
        return exact_value(self.tau) <= exact_value(self.bound)


def certify(spec: CountingMatrixSpec, bound) -> TauCertificate:
    m = build(spec)
    inv = inverse(m)
    return TauCertificate(spec.D, tau(m, inv), tau_coarse(m, inv), bound)


# --- Gaussian -----------------------------------------------------------------

def _log2(x) -> float:
    return float(mpmath.log(x, 2))


def gaussian_tau_bound(D: int, B, prec: int | None = None) -> mpmath.mpf:
    """``(5e / (1 - e^{-B/D}))^D``."""
    with mpmath.workprec(prec or DEFAULT_PREC):
        B = mpmath.mpf(B) if not isinstance(B, Fraction) else mpmath.mpf(B.numerator) / B.denominator
        return (5 * mpmath.e / (1 - mpmath.exp(-B / D))) ** D


def gaussian_default_prec(D: int, B) -> int:
    from .numerics import default_gaussian_prec
    return default_gaussian_prec(D, _log2(gaussian_tau_bound(D, B, 128)))


def gaussian_nodes(D: int, B, prec: int) -> list:
    """``x_i = 1 - i (1 - e^{-B/D}) / D`` for i = 0..D (equally spaced)."""
    with mpmath.workprec(prec):
        Bm = K._mp(Fraction(B) if is_exact(B) else B)
        r = (1 - mpmath.exp(-Bm / D)) / D
        return [1 - i * r for i in range(D + 1)]


def gaussian_spec(D: int, B=1, prec: int | None = None) -> CountingMatrixSpec:
    """(D+1)-point Gaussian layout with ``exp(-B alpha_i)`` equally spaced.

    ``alpha_0 = 0`` and ``alpha_D = 1/D`` are kept exact; ``beta_p = p``
    for ``p = 0..D`` and ``c = 0``.
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    kern = K.gaussian(B)
    prec = prec or gaussian_default_prec(D, kern.scale)
    x = gaussian_nodes(D, kern.scale, prec)
    with mpmath.workprec(prec):
        Bm = K._mp(kern.scale)
        alpha = [Fraction(0)] + [-mpmath.log(x[i]) / Bm for i in range(1, D)] + [Fraction(1, D)]
    return CountingMatrixSpec(D, kern, tuple(alpha), tuple(range(D + 1)), Fraction(0), prec)


def gaussian_gap_product(D: int, B, s: int, prec: int = DEFAULT_PREC):
    """``prod_{i != s} |x_i - x_s|`` over the Gaussian nodes."""
    x = gaussian_nodes(D, B, prec)
    with mpmath.workprec(prec):
        out = mpmath.mpf(1)
        for i in range(D + 1):
            if i != s:
                out *= abs(x[i] - x[s])
        return out


def gaussian_gap_floor(D: int, B, prec: int = DEFAULT_PREC):
    """``((1 - e^{-B/D}) / (2e))^D``, the lower bound on every gap product."""
    with mpmath.workprec(prec):
        Bm = K._mp(Fraction(B) if is_exact(B) else B)
        return ((1 - mpmath.exp(-Bm / D)) / (2 * mpmath.e)) ** D


# --- t-Student ----------------------------------------------------------------

def tstudent_spec(D: int, rho=1, prec: int | None = None) -> CountingMatrixSpec:
    """``alpha_l = l / D^2``, ``beta_p = p`` (l, p = 1..D), ``c = 0``.

    Integer ``rho`` gives an exact spec; otherwise ``prec`` bits are used.
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    kern = K.tstudent(rho)
    if prec is None and not kern.exact:
        prec = DEFAULT_PREC
    alpha = tuple(Fraction(l, D * D) for l in range(1, D + 1))
    beta = tuple(Fraction(p) for p in range(1, D + 1))
    unit = tuple(Fraction(i, D) for i in range(1, D + 1))
    return CountingMatrixSpec(D, kern, alpha, beta, Fraction(0), prec, (unit, unit, D))


def tstudent_tau_bound(D: int, rho=1, prec: int | None = None):
    """``(7e)^(2 rho D)``."""
    with mpmath.workprec(prec or DEFAULT_PREC):
        return (7 * mpmath.e) ** (2 * K._mp(Fraction(rho)) * D)


# --- reflected Rational Quadratic -------------------------------------------

def rq_spec(D: int, sigma=1, aligned: bool = False, prec: int | None = None) -> CountingMatrixSpec:
    """Spec for ``g(x) = (2 - x)^-sigma`` with ``alpha_l = l/D^2``, ``beta_p = p``.

    ``aligned=True`` shifts to ``alpha_l = (l-1)/D^2`` so that
    ``alpha_1 = 0``.
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    kern = K.reflected_rq(sigma)
    if prec is None and not kern.exact:
        prec = DEFAULT_PREC
    off = 1 if aligned else 0
    alpha = tuple(Fraction(l - off, D * D) for l in range(1, D + 1))
    beta = tuple(Fraction(p) for p in range(1, D + 1))
    a2 = tuple(Fraction(l - off, D) for l in range(1, D + 1))
    b2 = tuple(Fraction(p, D) for p in range(1, D + 1))
    return CountingMatrixSpec(D, kern, alpha, beta, Fraction(0), prec, (a2, b2, D))


def rq_tau_bound(D: int, sigma=1, prec: int | None = None):
    """``2^sigma (7e)^(2D)``."""
    with mpmath.workprec(prec or DEFAULT_PREC):
        return mpmath.mpf(2) ** K._mp(Fraction(sigma)) * (7 * mpmath.e) ** (2 * D)


def rq_tau_bound_fine(D: int, sigma=1, prec: int | None = None):
    """``D 2^sigma (3e)^(2D) 2^(D-1)``, the intermediate form of the RQ bound."""
    with mpmath.workprec(prec or DEFAULT_PREC):
        s = K._mp(Fraction(sigma))
        return D * mpmath.mpf(2) ** s * (3 * mpmath.e) ** (2 * D) * mpmath.mpf(2) ** (D - 1)


def unit_vandermonde_ratio(D: int, s: int) -> Fraction:
    """``V(x^{s-}) / V(x) = prod_{i != s} |x_i - x_s|^-1`` for ``x_i = i/D``, s 1-based."""
    out = Fraction(1)
    for i in range(1, D + 1):
        if i != s:
            out /= abs(Fraction(i - s, D))
    return out


# --- Cauchy matrices --------------------------------------------------------

def cauchy_matrix(a: Sequence, b: Sequence) -> Matrix:
    return Matrix.from_rows([[Fraction(1) / (x + y) for y in b] for x in a])


def cauchy_det(a: Sequence, b: Sequence) -> Fraction:
    """Closed form of ``det[1 / (a_i + b_j)]``."""
    if len(a) != len(b):
        raise ValueError("a and b must have equal length")
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    num, den = Fraction(1), Fraction(1)
    n = len(a)
    for i in range(n):
        for j in range(n):
            s = a[i] + b[j]
            if s == 0:
                raise ZeroDivisionError(f"a[{i}] + b[{j}] = 0")
            den *= s
    for i in range(n):
        for j in range(i + 1, n):
            num *= (a[i] - a[j]) * (b[i] - b[j])
    return num / den


def one_plus_product_matrix(a: Sequence, b: Sequence) -> Matrix:
    """``[1 / (1 + a_i b_j)]``."""
    return Matrix.from_rows([[Fraction(1) / (1 + x * y) for y in b] for x in a])


def cauchy_minor_ratio(a: Sequence, b: Sequence, s: int, t: int) -> Fraction:
    """``|det(M) / det(M minus row s, column t)|`` for ``M = [1/(1 + a_i b_j)]``.

    Indices are 0-based.
    """
    n = len(a)
    if len(b) != n:
        raise ValueError("a and b must have equal length")
    if not (0 <= s < n and 0 <= t < n):
        raise IndexError(f"(s, t) = ({s}, {t}) out of range for n = {n}")
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    num, den = Fraction(1), Fraction(1)
    for i in range(n):
        if i != s:
            num *= a[i] - a[s]
        den *= 1 + a[i] * b[t]
    for j in range(n):
        if j != t:
            num *= b[j] - b[t]
            den *= 1 + a[s] * b[j]
    return abs(num / den)


# --- Cauchy-Binet / Schur expansion ------------------------------------------

def _coeffs(spec: CountingMatrixSpec, upto: int) -> list:
    return [K.taylor_coeff(spec.kernel, k, spec.c, spec.prec) for k in range(upto + 1)]


def cauchy_binet_partial_sums(spec: CountingMatrixSpec, cutoff: int) -> list:
    """Partial sums of the Schur expansion of ``det(build(spec))``.

    Entry ``w`` includes every partition with ``|lam| <= w``, so the list
    has ``cutoff + 1`` entries, ordered by weight.
    """
    alpha, beta = list(spec.alpha), list(spec.beta)
    D = len(alpha)
    if len(beta) != D:
        raise ValueError("Cauchy-Binet expansion needs a square counting matrix")
    coef = _coeffs(spec, cutoff + D)
    prec = spec.prec
    with mpmath.workprec(prec or DEFAULT_PREC):
        a = [to_scalar(x, prec) for x in alpha]
        b = [to_scalar(x, prec) for x in beta]
        vv = vandermonde(a) * vandermonde(b)
        total = to_scalar(0, prec)
        out = []
        for w in range(cutoff + 1):
            for lam in partitions_of(w, D):
                prod = to_scalar(1, prec)
                for k in shifted(lam):
                    prod *= coef[k]
                if prod:
                    total += prod * schur_cauchy(lam, a, prec) * schur_cauchy(lam, b, prec)
            out.append(vv * total)
        return out


def cauchy_binet_det(spec: CountingMatrixSpec, cutoff: int):
    """Truncated Schur expansion of ``det(M)`` over partitions with ``|lam| <= cutoff``."""
    return cauchy_binet_partial_sums(spec, cutoff)[-1]


def elambda_flambda_ratio(lam: Sequence[int], kernel: K.KernelDescriptor, c=Fraction(0),
                          prec: int | None = None):
    """``F_lam / E_lam``: Taylor-coefficient products at ``lam + delta`` over ``lam + delta + 1``.

    ``lam`` has ``D - 1`` parts; the Schur factors of the two terms cancel.
    """
    out = Fraction(1) if prec is None else to_scalar(1, prec)
    for k in shifted(lam):
        num = K.taylor_coeff(kernel, k, c, prec)
        den = K.taylor_coeff(kernel, k + 1, c, prec)
        if num == 0 or den == 0:
            raise ZeroDivisionError(f"zero Taylor coefficient at order {k if num == 0 else k + 1}")
        out *= num / den
    return out


# --- helper inequalities ---------------------------------------------------

def power_superadditive(a, b, r) -> bool:
    """``(a + b)^r >= a^r + b^r`` for ``a, b > 0``, ``r >= 1``."""
    r = Fraction(r)
    if r.denominator == 1:
        a, b = Fraction(a), Fraction(b)
        return (a + b) ** int(r) >= a ** int(r) + b ** int(r)
    with mpmath.workprec(256):
        a, b, rr = K._mp(Fraction(a)), K._mp(Fraction(b)), K._mp(r)
        return (a + b) ** rr >= a ** rr + b ** rr


def factorial_balance(a: int, b: int) -> bool:
    """``a! b! >= (floor((a+b)/2)!)^2``."""
    return math.factorial(a) * math.factorial(b) >= math.factorial((a + b) // 2) ** 2
