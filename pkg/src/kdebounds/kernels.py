"""Radial kernel profiles f: [0, 1] -> [0, 1] with Taylor data.

Every descriptor is a *base family* evaluated at ``scale * x``; the Gaussian
``e^{-Bx}`` is the base ``e^{-y}`` at scale ``B``.  Rational families return
exact :class:`~fractions.Fraction` values on rational input.

Extension point: Laplacian / l1 and inner-product kernels are not
registered; add a family to ``_FAMILIES`` with ``value`` and ``coeff``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import mpmath

from .numerics import DEFAULT_PREC, Scalar, is_exact, to_scalar


class DomainError(ValueError):
    pass


class NoTaylorExpansion(ValueError):
    """The kernel has no registered coefficient formula at this center."""


def _is_int(x) -> bool:
    return is_exact(x) and Fraction(x).denominator == 1


def _rising(a, n: int):
    out = 1
    for i in range(n):
        out *= a + i
    return out


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


# --- base families: value(y, params) and coeff(n, y0, params) in y-space ---

def _gauss_value(y, p):
    return mpmath.exp(-_mp(y))


def _gauss_coeff(n, y0, p):
    sign = -1 if n % 2 else 1
    if is_exact(y0) and y0 == 0:
        return Fraction(sign, math.factorial(n))
    return sign * mpmath.exp(-_mp(y0)) / math.factorial(n)


def _rq_value(y, p):
    s = p["sigma"]
    if is_exact(y) and _is_int(s):
        return Fraction(1) / (1 + Fraction(y)) ** int(s)
    return (1 + _mp(y)) ** (-_mp(s))


def _rq_coeff(n, y0, p):
    s = p["sigma"]
    sign = -1 if n % 2 else 1
    if is_exact(y0) and _is_int(s):
        s = int(s)
        return sign * Fraction(_rising(s, n), math.factorial(n)) / (1 + Fraction(y0)) ** (s + n)
    s = _mp(s)
    return sign * _rising(s, n) / math.factorial(n) * (1 + _mp(y0)) ** (-(s + n))


def _rrq_value(y, p):
    s = p["sigma"]
    if is_exact(y) and _is_int(s):
        return Fraction(1) / (2 - Fraction(y)) ** int(s)
    return (2 - _mp(y)) ** (-_mp(s))


def _rrq_coeff(n, y0, p):
    # d^k/dx^k (2-x)^-s = (2-x)^-(s+k) * s (s+1) ... (s+k-1)
    s = p["sigma"]
    if is_exact(y0) and _is_int(s):
        s = int(s)
        return Fraction(_rising(s, n), math.factorial(n)) / (2 - Fraction(y0)) ** (s + n)
    s = _mp(s)
    return _rising(s, n) / math.factorial(n) * (2 - _mp(y0)) ** (-(s + n))


def _ts_value(y, p):
    r = p["rho"]
    if is_exact(y) and _is_int(r):
        return 1 / (1 + Fraction(y) ** int(r))
    y = _mp(y)
    return 1 / (1 + (y ** _mp(r) if y else mpmath.mpf(0)))


def _series_inverse(a: list, n: int) -> list:
    b = [1 / a[0]]
    for k in range(1, n + 1):
        acc = 0
        for j in range(1, min(k, len(a) - 1) + 1):
            acc += a[j] * b[k - j]
        b.append(-acc / a[0])
    return b


@lru_cache(maxsize=256)
def _ts_series_exact(rho: int, y0: Fraction, n: int) -> tuple:
    # 1 + (y0 + h)^rho as a polynomial in h, then invert the series
    a = [Fraction(math.comb(rho, k)) * y0 ** (rho - k) for k in range(rho + 1)]
    a[0] += 1
    return tuple(_series_inverse(a, n))


def _ts_coeff(n, y0, p):
    r = p["rho"]
    if _is_int(r) and is_exact(y0):
        return _ts_series_exact(int(r), Fraction(y0), n)[n]
    y0 = _mp(y0)
    if y0 <= 0:
        raise NoTaylorExpansion("t-Student with non-integer rho is not analytic at 0")
    r = _mp(r)
    a = [mpmath.binomial(r, k) * y0 ** (r - k) for k in range(n + 1)]
    a[0] += 1
    return _series_inverse(a, n)[n]


def _const_value(y, p):
    return Fraction(1)


def _const_coeff(n, y0, p):
    return Fraction(1 if n == 0 else 0)


@dataclass(frozen=True)
class _Family:
    value: object
    coeff: object
    exact: object  # params -> bool
    completely_monotone: object
    absolutely_monotone: bool
    decreasing: bool


_FAMILIES = {
    "gaussian": _Family(_gauss_value, _gauss_coeff, lambda p: False, lambda p: True, False, True),
    "rq": _Family(_rq_value, _rq_coeff, lambda p: _is_int(p["sigma"]), lambda p: True, False, True),
    "cauchy": _Family(_rq_value, _rq_coeff, lambda p: True, lambda p: True, False, True),
    "tstudent": _Family(_ts_value, _ts_coeff, lambda p: _is_int(p["rho"]),
                        lambda p: p["rho"] == 1, False, True),
    "reflected-rq": _Family(_rrq_value, _rrq_coeff, lambda p: _is_int(p["sigma"]),
                            lambda p: False, True, False),
    "constant": _Family(_const_value, _const_coeff, lambda p: True, lambda p: True, True, False),
}


@dataclass(frozen=True)
class KernelDescriptor:
    """Kernel profile ``x -> base(scale * x)`` on the unit interval.

    ``base`` is set for reflected kernels ``x -> base(1 - x)``; the family
    fields are then unused.
    """

    family: str
    params: tuple = ()
    scale: Scalar = Fraction(1)
    base: "KernelDescriptor | None" = field(default=None, compare=True)

    @property
    def param(self) -> dict:
        return dict(self.params)

    @property
    def exact(self) -> bool:
        if self.base is not None:
            return self.base.exact
        return is_exact(self.scale) and _FAMILIES[self.family].exact(self.param)

    @property
    def completely_monotone(self) -> bool:
        if self.base is not None:
            return False
        return bool(_FAMILIES[self.family].completely_monotone(self.param))

    @property
    def absolutely_monotone(self) -> bool:
        if self.base is not None:
            return self.base.completely_monotone
        return _FAMILIES[self.family].absolutely_monotone

    @property
    def rapid_decay_checkable(self) -> bool:
        return self.base is None and _FAMILIES[self.family].decreasing

    @property
    def name(self) -> str:
        if self.base is not None:
            return f"reflected({self.base.name})"
        parts = [f"{k}={v}" for k, v in self.params]
        if self.family == "gaussian":
            parts = [f"B={self.scale}"]
        elif self.scale != 1:
            parts.append(f"scale={self.scale}")
        return self.family + (":" + ",".join(parts) if parts else "")

    def __call__(self, x, prec: int | None = None):
        return eval_f(self, x, prec)

    def _value(self, x, prec):
        if self.base is not None:
            return self.base._value(1 - x, prec)
        fam = _FAMILIES[self.family]
        with mpmath.workprec(prec or DEFAULT_PREC):
            y = self.scale * x if is_exact(self.scale) and is_exact(x) else _mp(self.scale) * _mp(x)
            return fam.value(y, self.param)

    def _coeff(self, n, c, prec):
        if self.base is not None:
            v = self.base._coeff(n, 1 - c, prec)
            return -v if n % 2 else v
        fam = _FAMILIES[self.family]
        with mpmath.workprec(prec or DEFAULT_PREC):
            if is_exact(self.scale) and is_exact(c):
                y0 = self.scale * c
                return fam.coeff(n, y0, self.param) * Fraction(self.scale) ** n
            return fam.coeff(n, _mp(self.scale) * _mp(c), self.param) * _mp(self.scale) ** n


def _coerce(v, exact_ok: bool, prec: int | None):
    if exact_ok and is_exact(v):
        return Fraction(v)
    return to_scalar(v if not isinstance(v, int) else Fraction(v), prec or DEFAULT_PREC)


def eval_f(k: KernelDescriptor, x, prec: int | None = None) -> Scalar:
    """Kernel value at ``x`` in [0, 1].

    Exact rational input to an exact family yields a Fraction; anything else
    is computed as an mpf at ``prec`` bits (default DEFAULT_PREC).
    """
    if isinstance(x, float):
        x = Fraction(x)
    if x < 0 or x > 1:
        raise DomainError(f"kernel argument {x} outside [0, 1]")
    exact_ok = k.exact and is_exact(x) and prec is None
    return _coerce(k._value(x, prec), exact_ok, prec)


def taylor_coeff(k: KernelDescriptor, n: int, c=Fraction(0), prec: int | None = None) -> Scalar:
    """``f^(n)(c) / n!``."""
    if n < 0:
        raise ValueError("coefficient index must be >= 0")
    if c < 0 or c > 1:
        raise DomainError(f"center {c} outside [0, 1]")
    v = k._coeff(n, c, prec)
    return _coerce(v, is_exact(v) and prec is None, prec)


def _frac(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return x


def gaussian(B=1) -> KernelDescriptor:
    B = _frac(B)
    if B < 1:
        raise ValueError("Gaussian scale B must be >= 1")
    return KernelDescriptor("gaussian", (), B)


def rational_quadratic(sigma=1) -> KernelDescriptor:
    sigma = _frac(sigma)
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    return KernelDescriptor("rq", (("sigma", sigma),))


def tstudent(rho=1) -> KernelDescriptor:
    rho = _frac(rho)
    if rho < 1:
        raise ValueError("rho must be >= 1")
    return KernelDescriptor("tstudent", (("rho", rho),))


def cauchy() -> KernelDescriptor:
    return KernelDescriptor("cauchy", (("sigma", Fraction(1)),))


def reflected_rq(sigma=1) -> KernelDescriptor:
    sigma = _frac(sigma)
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    return KernelDescriptor("reflected-rq", (("sigma", sigma),))


def constant() -> KernelDescriptor:
    return KernelDescriptor("constant")


def scale_to_unit(f: KernelDescriptor, B) -> KernelDescriptor:
    """``x -> f(B x)``; maps a kernel on [0, B] onto the unit domain."""
    B = _frac(B)
    if B <= 0:
        raise ValueError("scale must be positive")
    if f.base is not None:
        raise ValueError("cannot rescale a reflected kernel")
    scale = B * f.scale if is_exact(B) and is_exact(f.scale) else _mp(B) * _mp(f.scale)
    return replace(f, scale=scale)


def reflect(f: KernelDescriptor) -> KernelDescriptor:
    """``g(x) = f(1 - x)``, absolutely monotone when f is completely monotone."""
    if not f.completely_monotone:
        raise ValueError(f"{f.name} is not completely monotone; reflection is not absolutely monotone")
    if f.family in ("rq", "cauchy") and f.scale == 1:
        return reflected_rq(f.param["sigma"])
    if f.family == "constant":
        return f
    return KernelDescriptor("reflected", base=f)


def parse_kernel(text: str) -> KernelDescriptor:
    """Parse ``gaussian:B=2``, ``rq:sigma=1``, ``tstudent:rho=2``, ``cauchy``..."""
    name, _, rest = text.strip().partition(":")
    kw = {}
    for part in filter(None, rest.split(",")):
        key, eq, val = part.partition("=")
        if not eq:
            raise ValueError(f"malformed kernel parameter {part!r}")
        try:
            kw[key.strip()] = Fraction(val.strip())
        except ValueError as exc:
            raise ValueError(f"bad value for {key}: {val!r}") from exc
    builders = {
        "gaussian": (gaussian, {"B"}),
        "rq": (rational_quadratic, {"sigma"}),
        "tstudent": (tstudent, {"rho"}),
        "cauchy": (cauchy, set()),
        "reflected-rq": (reflected_rq, {"sigma"}),
    }
    if name not in builders:
        raise ValueError(f"unknown kernel {name!r}; expected one of {sorted(builders)}")
    fn, allowed = builders[name]
    extra = set(kw) - allowed
    if extra:
        raise ValueError(f"unexpected parameters for {name}: {sorted(extra)}")
    return fn(**kw)
