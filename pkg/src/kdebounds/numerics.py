"""Dense linear algebra over exact rationals or mpmath big-floats.

A :class:`Matrix` carries one arithmetic mode for all of its entries:
``prec=None`` means exact :class:`fractions.Fraction` arithmetic, an integer
``prec`` means :class:`mpmath.mpf` arithmetic at that many mantissa bits.
All operations are pure and return new objects.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import mpmath

Scalar = Union[Fraction, mpmath.mpf]

MIN_PREC = 64
DEFAULT_PREC = max(MIN_PREC, int(os.environ.get("KDEBOUNDS_PRECISION", "128")))


class SingularMatrixError(ZeroDivisionError):
    pass


class PivotUnderflowError(SingularMatrixError):
    """Big-float elimination met a pivot below the configured threshold."""


def check_prec(prec: int | None) -> int | None:
    if prec is not None and prec < MIN_PREC:
        raise ValueError(f"precision must be >= {MIN_PREC} bits, got {prec}")
    return prec


def to_scalar(x, prec: int | None = None) -> Scalar:
    """Coerce ``x`` into the arithmetic mode given by ``prec``."""
    if prec is None:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, mpmath.mpf):
            raise TypeError("cannot convert a big-float into an exact rational")
        if isinstance(x, float):
            raise TypeError("floats are not accepted in exact mode; pass a Fraction")
        return Fraction(x)
    with mpmath.workprec(prec):
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        return mpmath.mpf(x)


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def scalar_abs(x):
    return abs(x)


@dataclass(frozen=True)
class Matrix:
    rows: int
    cols: int
    entries: tuple
    prec: int | None = None

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entries length does not match shape")
        check_prec(self.prec)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], prec: int | None = None) -> "Matrix":
        rows = [list(r) for r in rows]
        n = len(rows)
        m = len(rows[0]) if n else 0
        if any(len(r) != m for r in rows):
            raise ValueError("ragged rows")
        ents = tuple(to_scalar(x, prec) for r in rows for x in r)
        return cls(n, m, ents, prec)

    @classmethod
    def identity(cls, n: int, prec: int | None = None) -> "Matrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], prec)

    @classmethod
    def diag(cls, values: Sequence, prec: int | None = None) -> "Matrix":
        n = len(values)
        return cls.from_rows(
            [[values[i] if i == j else 0 for j in range(n)] for i in range(n)], prec
        )

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple:
        return self.entries[j::self.cols]

    def tolist(self) -> list[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def transpose(self) -> "Matrix":
        return Matrix.from_rows([self.col(j) for j in range(self.cols)], self.prec)

    def minor(self, s: int, t: int) -> "Matrix":
        """Drop row ``s`` and column ``t`` (0-based)."""
        return Matrix.from_rows(
            [[self[i, j] for j in range(self.cols) if j != t]
             for i in range(self.rows) if i != s],
            self.prec,
        )

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch")
            with _ctx(self.prec):
                out = [[_dot(self.row(i), other.col(j)) for j in range(other.cols)]
                       for i in range(self.rows)]
            return Matrix.from_rows(out, self.prec)
        vec = [to_scalar(x, self.prec) for x in other]
        if len(vec) != self.cols:
            raise ValueError("shape mismatch")
        with _ctx(self.prec):
            return [_dot(self.row(i), vec) for i in range(self.rows)]

    def map(self, fn) -> "Matrix":
        with _ctx(self.prec):
            return Matrix(self.rows, self.cols, tuple(fn(x) for x in self.entries), self.prec)

    def to_prec(self, prec: int | None) -> "Matrix":
        return Matrix.from_rows(self.tolist(), prec)


class _nullctx:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _ctx(prec):
    return _nullctx() if prec is None else mpmath.workprec(prec)


def _dot(a: Iterable, b: Iterable):
    total = 0
    for x, y in zip(a, b):
        total += x * y
    return total


def _pivot_row(a: list[list], k: int) -> int:
    # largest |a[r][k]|, ties to the lowest row index
    best, best_val = k, abs(a[k][k])
    for r in range(k + 1, len(a)):
        v = abs(a[r][k])
        if v > best_val:
            best, best_val = r, v
    return best


def _pivot_floor(m: Matrix):
    if m.prec is None:
        return 0
    scale = max((abs(x) for x in m.entries), default=0)
    return scale * mpmath.ldexp(1, -(m.prec - 8))


def det(m: Matrix) -> Scalar:
    """Determinant by partial-pivot elimination (exact in rational mode)."""
    if not m.is_square:
        raise ValueError(f"determinant of non-square {m.rows}x{m.cols} matrix")
    n = m.rows
    if n == 0:
        return to_scalar(1, m.prec)
    a = m.tolist()
    with _ctx(m.prec):
        result = to_scalar(1, m.prec)
        for k in range(n):
            p = _pivot_row(a, k)
            if a[p][k] == 0:
                return to_scalar(0, m.prec)
            if p != k:
                a[k], a[p] = a[p], a[k]
                result = -result
            piv = a[k][k]
            result *= piv
            for r in range(k + 1, n):
                f = a[r][k] / piv
                if f:
                    row_r, row_k = a[r], a[k]
                    for c in range(k + 1, n):
                        row_r[c] -= f * row_k[c]
        return result


def inverse(m: Matrix, pivot_floor=None) -> Matrix:
    """Gauss-Jordan inverse with partial pivoting.

    In big-float mode a pivot whose magnitude is at or below ``pivot_floor``
    (default: largest entry times 2**-(prec-8)) raises PivotUnderflowError.
    """
    if not m.is_square:
        raise ValueError(f"inverse of non-square {m.rows}x{m.cols} matrix")
    n = m.rows
    floor = _pivot_floor(m) if pivot_floor is None else pivot_floor
    with _ctx(m.prec):
        one, zero = to_scalar(1, m.prec), to_scalar(0, m.prec)
        a = [list(m.row(i)) + [one if i == j else zero for j in range(n)] for i in range(n)]
        for k in range(n):
            p = _pivot_row(a, k)
            piv = a[p][k]
            if piv == 0:
                raise SingularMatrixError("matrix is singular")
            if m.prec is not None and abs(piv) <= floor:
                raise PivotUnderflowError(f"pivot {mpmath.nstr(piv, 5)} below threshold")
            if p != k:
                a[k], a[p] = a[p], a[k]
            row_k = a[k]
            inv_piv = one / piv
            for c in range(2 * n):
                row_k[c] *= inv_piv
            for r in range(n):
                if r == k:
                    continue
                f = a[r][k]
                if f:
                    row_r = a[r]
                    for c in range(k, 2 * n):
                        row_r[c] -= f * row_k[c]
        return Matrix(n, n, tuple(x for row in a for x in row[n:]), m.prec)


def row_abs_sums(m: Matrix) -> list:
    with _ctx(m.prec):
        return [sum((abs(x) for x in m.row(i)), to_scalar(0, m.prec)) for i in range(m.rows)]


def tau(m: Matrix, inv: Matrix | None = None) -> Scalar:
    """Induced infinity-norm of ``m``'s inverse (maximum absolute row sum)."""
    inv = inverse(m) if inv is None else inv
    return max(row_abs_sums(inv))


def tau_coarse(m: Matrix, inv: Matrix | None = None) -> Scalar:
    """``D * max |M^-1[t, s]|``, the entrywise relaxation of :func:`tau`."""
    inv = inverse(m) if inv is None else inv
    with _ctx(m.prec):
        return m.rows * max(abs(x) for x in inv.entries)


def vandermonde(u: Sequence) -> Scalar:
    """``prod_{i<j} (u_j - u_i)``."""
    out = 1
    for j in range(len(u)):
        for i in range(j):
            out *= u[j] - u[i]
    return Fraction(out) if isinstance(out, int) else out


def power_matrix(u: Sequence, exponents: Sequence[int], prec: int | None = None) -> Matrix:
    """Generalized Vandermonde matrix ``[u_i ** r_j]``."""
    return Matrix.from_rows([[x ** r for r in exponents] for x in u], prec)


def default_gaussian_prec(d: int, log2_bound: float) -> int:
    """64 + ceil(D * log2(bound)) bits of headroom for an inverse of that size."""
    return MIN_PREC + max(0, math.ceil(d * log2_bound))


def fmt(x, digits: int = 17) -> str:
    """Deterministic decimal rendering used by the CLI writers."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        with mpmath.workprec(max(64, 4 * digits)):
            return mpmath.nstr(mpmath.mpf(x.numerator) / x.denominator, digits)
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, digits)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def exact_value(x) -> Fraction:
    """Exact rational value of a Fraction, int or mpf (no rounding)."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    # read the mantissa directly; mpf(x) would round to the ambient precision
    man, exp = (x if isinstance(x, mpmath.mpf) else mpmath.mpf(x)).man_exp
    return Fraction(int(man)) * Fraction(2) ** int(exp)
