"""Schur polynomials in the weakly-increasing partition convention.

A partition is a tuple ``lam = (lam_1 <= ... <= lam_m)`` of nonnegative
integers; zero parts are kept.  Tableau rows are stored bottom to top, so
row ``i`` has ``lam[i]`` cells and the top row is the longest.  Entries
weakly decrease along each row (left to right) and strictly decrease down
each column (top to bottom).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import mpmath

from .numerics import Matrix, det, power_matrix, vandermonde


def check_partition(lam: Sequence[int]) -> tuple[int, ...]:
    lam = tuple(int(x) for x in lam)
    if any(x < 0 for x in lam):
        raise ValueError(f"negative part in {lam}")
    if any(a > b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"partition {lam} is not weakly increasing")
    return lam


def staircase(m: int) -> tuple[int, ...]:
    return tuple(range(m))


def shifted(lam: Sequence[int]) -> tuple[int, ...]:
    """``lam + delta``."""
    return tuple(x + i for i, x in enumerate(lam))


def partitions_of(weight: int, m: int, floor: int = 0) -> Iterator[tuple[int, ...]]:
    """Weakly increasing m-tuples with parts >= floor summing to weight, lexicographic."""
    if m == 0:
        if weight == 0:
            yield ()
        return
    # first part p leaves m-1 parts each >= p
    for p in range(floor, weight // m + 1):
        for rest in partitions_of(weight - p, m - 1, p):
            yield (p,) + rest


def partitions_up_to(max_weight: int, m: int) -> Iterator[tuple[int, ...]]:
    """All partitions with ``|lam| <= max_weight``, by weight then lexicographic."""
    for w in range(max_weight + 1):
        yield from partitions_of(w, m)


@dataclass(frozen=True)
class SSYT:
    shape: tuple[int, ...]
    rows: tuple[tuple[int, ...], ...]

    def type(self, m: int | None = None) -> tuple[int, ...]:
        m = len(self.shape) if m is None else m
        counts = [0] * m
        for row in self.rows:
            for e in row:
                counts[e - 1] += 1
        return tuple(counts)

    @property
    def reading_word(self) -> tuple[int, ...]:
        return tuple(e for row in self.rows for e in row)

    def is_valid(self, m: int | None = None) -> bool:
        m = len(self.shape) if m is None else m
        if tuple(len(r) for r in self.rows) != self.shape:
            return False
        for row in self.rows:
            if any(not 1 <= e <= m for e in row):
                return False
            if any(a < b for a, b in zip(row, row[1:])):
                return False
        for i in range(len(self.rows) - 1):
            below, above = self.rows[i], self.rows[i + 1]
            if any(above[j] <= below[j] for j in range(len(below))):
                return False
        return True


@lru_cache(maxsize=4096)
def _enumerate(lam: tuple[int, ...]) -> tuple[SSYT, ...]:
    m = len(lam)
    width = lam[-1] if lam else 0
    # cells in column-major order, each column filled top to bottom
    cells = []
    for j in range(width):
        column = [i for i in range(m) if lam[i] > j]
        for i in reversed(column):
            cells.append((i, j, column[0]))
    grid = [[0] * lam[i] for i in range(m)]
    out = []

    def fill(k: int):
        if k == len(cells):
            out.append(SSYT(lam, tuple(tuple(r) for r in grid)))
            return
        i, j, bottom = cells[k]
        hi = m
        if i + 1 < m:
            hi = min(hi, grid[i + 1][j] - 1)
        if j > 0:
            hi = min(hi, grid[i][j - 1])
        lo = 1 + (i - bottom)  # room for the strictly smaller cells below
        for v in range(lo, hi + 1):
            grid[i][j] = v
            fill(k + 1)
        grid[i][j] = 0

    fill(0)
    out.sort(key=lambda t: t.reading_word)
    return tuple(out)


def enumerate_ssyt(lam: Sequence[int], m: int | None = None) -> list[SSYT]:
    """All SSYT of shape ``lam`` on the alphabet ``1..m`` (m = number of parts)."""
    lam = check_partition(lam)
    if m is not None and m != len(lam):
        raise ValueError(f"partition has {len(lam)} parts, alphabet size is {m}")
    return list(_enumerate(lam))


def _monomial(u: Sequence, exps: Sequence[int]):
    out = 1
    for x, e in zip(u, exps):
        if e:
            out *= x ** e
    return out


def schur_littlewood(lam: Sequence[int], u: Sequence):
    """Sum of ``u^type(T)`` over all SSYT ``T`` of shape ``lam``."""
    lam = check_partition(lam)
    if len(u) != len(lam):
        raise ValueError(f"{len(u)} variables for a {len(lam)}-part partition")
    total = 0
    for t in _enumerate(lam):
        total += _monomial(u, t.type())
    return Fraction(total) if isinstance(total, int) else total


def schur_cauchy(lam: Sequence[int], u: Sequence, prec: int | None = None):
    """``det(u^(lam + delta)) / V(u)``; requires pairwise distinct variables."""
    lam = check_partition(lam)
    if len(u) != len(lam):
        raise ValueError(f"{len(u)} variables for a {len(lam)}-part partition")
    if len(set(u)) != len(u):
        raise ValueError("schur_cauchy needs pairwise distinct variables")
    num = det(power_matrix(u, shifted(lam), prec))
    if prec is None:
        return num / vandermonde(list(Matrix.from_rows([u]).entries))
    with mpmath.workprec(prec):
        return num / vandermonde(list(Matrix.from_rows([u], prec).entries))


def _has_low_order(q, m: int) -> bool:
    return any(q ** k == 1 for k in range(1, m))


def principal_specialization(lam: Sequence[int], q, m: int | None = None):
    """``s_lam(1, q, ..., q^(m-1))`` by the product formula."""
    lam = check_partition(lam)
    m = len(lam) if m is None else m
    if m != len(lam):
        raise ValueError(f"partition has {len(lam)} parts, m is {m}")
    q = Fraction(q) if isinstance(q, (int, str)) else q
    if q == 0 or _has_low_order(q, m):
        raise ValueError(f"q={q} has multiplicative order below {m}")
    sh = shifted(lam)
    out = Fraction(1) if isinstance(q, Fraction) else 1
    for j in range(m):
        for i in range(j):
            out *= (q ** sh[j] - q ** sh[i]) / (q ** j - q ** i)
    return out


def weyl_dimension(lam: Sequence[int], m: int | None = None) -> int:
    """``V(lam + delta) / V(delta)``, the number of SSYT of shape lam."""
    lam = check_partition(lam)
    if m is not None and m != len(lam):
        raise ValueError(f"partition has {len(lam)} parts, m is {m}")
    v = vandermonde(shifted(lam)) / vandermonde(staircase(len(lam)))
    assert v.denominator == 1
    return int(v)


def first_order_bounds(lam: Sequence[int], u: Sequence):
    """``(u^lam, weyl_dimension * u^lam)`` bracketing ``s_lam(u)``."""
    lam = check_partition(lam)
    if len(u) != len(lam):
        raise ValueError(f"{len(u)} variables for a {len(lam)}-part partition")
    if any(x < 0 for x in u) or any(a > b for a, b in zip(u, u[1:])):
        raise ValueError("u must be nonnegative and weakly increasing")
    low = _monomial(u, lam)
    low = Fraction(low) if isinstance(low, int) else low
    return low, weyl_dimension(lam) * low
