"""Reductions from closest-pair and orthogonal-vector problems to KDE.

The main reduction lifts an integer BCP instance once per row of a
counting matrix ``M``, asks a KDE oracle for ``K x 1`` on each lift, and
solves ``M W = U`` to read off how many points sit at each squared
distance.  With oracle error at most ``(3 n tau(M))^-1 * n`` per entry the
solve is off by at most 1/3 everywhere, so rounding recovers ``W``.

Also here: the positive-definite variant (reflected kernel, re-indexed
counts), the single-threshold decision reduction for rapidly decaying
kernels, and the tensor lift from integer OV to l2-BCP.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np

from . import _backend
from . import kernels as K
from .counting import CountingMatrixSpec, build
from .numerics import (
    DEFAULT_PREC,
    Matrix,
    Scalar,
    inverse,
    row_abs_sums,
    to_scalar,
)


class RoundingAmbiguous(ArithmeticError):
    """A recovered count was too far from every integer to trust."""


class RapidDecayViolated(ValueError):
    """The kernel does not separate distance p from p+1 by a factor of n."""


# --- point sets -----------------------------------------------------------

@dataclass(frozen=True)
class PointSet:
    """``n`` integer vectors of a common dimension ``m``."""

    points: tuple
    E: int | None = None

    def __post_init__(self):
        pts = tuple(tuple(int(c) for c in p) for p in self.points)
        if pts and len({len(p) for p in pts}) != 1:
            raise ValueError("all vectors must have the same dimension")
        if self.E is not None and any(abs(c) > self.E for p in pts for c in p):
            raise ValueError(f"coordinate exceeds bound E={self.E}")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return len(self.points[0]) if self.points else 0

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(self.n, self.m)

    def padded(self, value: int, k: int = 1) -> "PointSet":
        """Append ``k`` coordinates equal to ``value``."""
        return PointSet(tuple(p + (value,) * k for p in self.points))


@dataclass(frozen=True)
class BCPInstance:
    """``X, Y`` with every squared distance at most ``D``."""

    X: PointSet
    Y: PointSet
    D: int

    def __post_init__(self):
        if self.X.n == 0 or self.Y.n == 0:
            raise ValueError("point sets must be nonempty")
        if self.X.m != self.Y.m:
            raise ValueError("X and Y have different dimensions")
        top = int(_backend.sqdist_int(self.X.array(), self.Y.array()).max())
        if top > self.D:
            raise ValueError(f"max squared distance {top} exceeds D={self.D}")

    @classmethod
    def hamming(cls, X: Sequence, Y: Sequence) -> "BCPInstance":
        """0/1 vectors viewed as l2-BCP with ``D = m``."""
        X, Y = PointSet(tuple(X)), PointSet(tuple(Y))
        if any(c not in (0, 1) for p in X.points + Y.points for c in p):
            raise ValueError("Hamming instances need 0/1 coordinates")
        return cls(X, Y, X.m)

    @property
    def n(self) -> int:
        return self.X.n

    def distances(self) -> np.ndarray:
        return _backend.sqdist_int(self.X.array(), self.Y.array())


def brute_force_bcp(inst: BCPInstance) -> int:
    return _backend.min_sqdist_int(inst.X.array(), inst.Y.array())


def brute_force_ov(X: PointSet, Y: PointSet) -> bool:
    """Is there a pair with ``<x, y> = 0``?"""
    if X.n == 0 or Y.n == 0:
        return False
    return bool((X.array() @ Y.array().T == 0).any())


# --- distance counts ------------------------------------------------------

@dataclass(frozen=True)
class DistanceCountMatrix:
    """Row ``r`` counts, for each ``x_i``, the points at squared distance ``distances[r]``."""

    counts: tuple
    distances: tuple
    n: int

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.counts)
        object.__setattr__(self, "counts", rows)
        object.__setattr__(self, "distances", tuple(int(d) for d in self.distances))
        if len(rows) != len(self.distances):
            raise ValueError("one distance label per row is required")
        if any(v < 0 for r in rows for v in r):
            raise ValueError("counts must be nonnegative")
        if any(s != self.n for s in self.column_sums):
            raise ValueError(f"column sums {self.column_sums} differ from n={self.n}")

    def __getitem__(self, ri):
        r, i = ri
        return self.counts[r][i]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.counts), (len(self.counts[0]) if self.counts else 0)

    @property
    def column_sums(self) -> tuple[int, ...]:
        if not self.counts:
            return ()
        return tuple(sum(col) for col in zip(*self.counts))

    def histogram(self) -> dict:
        """``{distance: per-column counts}`` including empty classes."""
        return {d: r for d, r in zip(self.distances, self.counts)}

    def standard(self) -> "DistanceCountMatrix":
        """Rows reordered by ascending distance (undoes the re-indexed layout)."""
        order = sorted(range(len(self.distances)), key=self.distances.__getitem__)
        return DistanceCountMatrix(
            tuple(self.counts[r] for r in order),
            tuple(self.distances[r] for r in order),
            self.n,
        )

    def min_distance(self) -> int:
        hits = [d for d, r in zip(self.distances, self.counts) if any(r)]
        if not hits:
            raise ValueError("no distance class is populated")
        return min(hits)


def distance_counts(inst: BCPInstance, distances: Sequence[int]) -> DistanceCountMatrix:
    """Brute-force ``W`` over the given distance labels."""
    top = max(max(distances), inst.D)
    hist = _backend.distance_histogram(inst.X.array(), inst.Y.array(), top)
    rows = [hist[d] for d in distances]
    return DistanceCountMatrix(tuple(map(tuple, rows)), tuple(distances), inst.Y.n)


# --- lifting --------------------------------------------------------------

@dataclass(frozen=True)
class LiftedInstance:
    """Points ``sqrt(alpha) x`` and ``sqrt(alpha) y`` with an extra coordinate.

    The x side carries ``sqrt(extra)`` in coordinate m+1 and the y side 0,
    so ``|x~ - y~|^2 = extra + alpha |x - y|^2`` holds exactly; the
    coordinates themselves are kept as integers plus the two scalars.
    """

    X: np.ndarray
    Y: np.ndarray
    alpha: Scalar
    extra: Scalar
    prec: int | None = None
    index: int | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def base_distances(self) -> np.ndarray:
        return _backend.sqdist_int(self.X, self.Y)

    def sqdist(self, d: int) -> Scalar:
        """Lifted squared distance of a pair whose base distance is ``d``."""
        with mpmath.workprec(self.prec or DEFAULT_PREC):
            return self.extra + self.alpha * d

    def sqdist_matrix(self) -> list[list]:
        cache: dict[int, Scalar] = {}
        out = []
        for row in self.base_distances():
            out.append([cache.setdefault(int(d), self.sqdist(int(d))) for d in row])
        return out

    def float_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Explicit float64 coordinates in dimension m+1."""
        a = math.sqrt(float(self.alpha))
        e = math.sqrt(float(self.extra))
        X = np.hstack([a * self.X.astype(np.float64), np.full((self.n, 1), e)])
        Y = np.hstack([a * self.Y.astype(np.float64), np.zeros((self.Y.shape[0], 1))])
        return X, Y


def _check_unit(x, what: str, prec):
    with mpmath.workprec(prec or DEFAULT_PREC):
        if x < 0 or x > 1:
            raise K.DomainError(f"{what} = {x if isinstance(x, Fraction) else mpmath.nstr(x, 10)} "
                                "outside [0, 1]")


def lift_points(inst: BCPInstance, l: int, spec: CountingMatrixSpec) -> LiftedInstance:
    """Lift for row ``l`` (0-based) of ``spec``: scale by ``sqrt(alpha_l)``, extra ``sqrt(c)``."""
    alpha, c = spec.alpha[l], spec.c
    if alpha < 0:
        raise K.DomainError(f"alpha_{l} is negative")
    if c < 0:
        raise K.DomainError("c is negative")
    with mpmath.workprec(spec.prec or DEFAULT_PREC):
        _check_unit(c + alpha * inst.D, f"c + alpha_{l} * D", spec.prec)
    return LiftedInstance(inst.X.array(), inst.Y.array(), alpha, c, spec.prec, l)


def pd_lift_points(inst: BCPInstance, l: int, spec: CountingMatrixSpec) -> LiftedInstance:
    """Lift with extra coordinate ``sqrt(1 - c - alpha_l D)`` for the reflected variant."""
    alpha, c = spec.alpha[l], spec.c
    with mpmath.workprec(spec.prec or DEFAULT_PREC):
        radicand = 1 - c - alpha * spec.D
        if radicand < 0:
            raise K.DomainError(f"1 - c - alpha_{l} * D is negative for row {l}")
    return LiftedInstance(inst.X.array(), inst.Y.array(), alpha, radicand, spec.prec, l)


# --- oracles --------------------------------------------------------------

KDEOracle = Callable[[LiftedInstance, Sequence, Scalar], list]


class ExactOracle:
    """``K u`` computed from the lifted distances in the spec's arithmetic.

    Kernel values are memoized per base distance, so one call costs
    ``O(n^2 m)`` integer work plus a kernel evaluation per distinct distance.
    """

    serial = False

    def __init__(self, kernel: K.KernelDescriptor, prec: int | None = None):
        self.kernel = kernel
        self.prec = prec

    def __call__(self, lifted: LiftedInstance, u: Sequence, eps=0) -> list:
        prec = lifted.prec if lifted.prec is not None else self.prec
        dist = lifted.base_distances()
        values: dict[int, Scalar] = {}
        u = [to_scalar(w, prec) for w in u]
        out = []
        with mpmath.workprec(prec or DEFAULT_PREC):
            for row in dist:
                buckets: dict[int, Scalar] = {}
                for d, w in zip(row.tolist(), u):
                    buckets[d] = buckets.get(d, 0) + w
                total = to_scalar(0, prec)
                for d in sorted(buckets):
                    if d not in values:
                        values[d] = K.eval_f(self.kernel, lifted.sqdist(d), prec)
                    total += values[d] * buckets[d]
                out.append(total)
        return out


@functools.lru_cache(maxsize=64)
def counting_inverse(spec: CountingMatrixSpec) -> Matrix:
    """``M^-1`` for ``spec``, cached since specs are immutable."""
    return inverse(build(spec))


def worst_case_signs(spec: CountingMatrixSpec) -> dict[int, int]:
    """Per-row signs that push ``M^-1 U`` furthest, along the worst row of ``M^-1``."""
    inv = counting_inverse(spec)
    sums = row_abs_sums(inv)
    worst = max(range(len(sums)), key=lambda r: (sums[r], -r))
    return {l: (1 if inv[worst, l] >= 0 else -1) for l in range(inv.cols)}


# --- main reduction -------------------------------------------------------

@dataclass(frozen=True)
class RecoveryReport:
    W: DistanceCountMatrix
    max_residual: Scalar
    tau: Scalar
    eps: Scalar
    shift: int
    raw: list = field(repr=False, default_factory=list)


def reduction_shift(spec: CountingMatrixSpec) -> int:
    """Distance offset so that distance 0 lands on the first column index."""
    return spec.index_set[0]


def reduction_budget(spec: CountingMatrixSpec, n: int) -> tuple[Scalar, Scalar]:
    """``(tau(M), (3 n tau(M))^-1)`` in the spec's arithmetic."""
    t = max(row_abs_sums(counting_inverse(spec)))
    with mpmath.workprec(spec.prec or DEFAULT_PREC):
        return t, 1 / (3 * n * t)


def _round_slack(prec: int | None):
    # big-float solves carry rounding noise far below this, exact ones none
    return Fraction(0) if prec is None else mpmath.ldexp(1, -32)


def _nearest(x, prec):
    if prec is None:
        return math.floor(x + Fraction(1, 2))
    return int(mpmath.nint(x))


def _solve_and_round(spec, inv: Matrix, rows: list, n: int, total: int, distances, eps, tau,
                     shift):
    prec = spec.prec
    limit = Fraction(1, 3)
    slack = _round_slack(prec)
    counts = [[0] * n for _ in range(inv.rows)]
    worst = to_scalar(0, prec)
    with mpmath.workprec(prec or DEFAULT_PREC):
        for i in range(n):
            col = inv @ [rows[l][i] for l in range(len(rows))]
            for p, w in enumerate(col):
                k = _nearest(w, prec)
                r = abs(w - k)
                worst = max(worst, r)
                if r > limit + slack:
                    raise RoundingAmbiguous(
                        f"entry ({p}, {i}) is {_show(r)} from the nearest integer"
                    )
                if k < 0:
                    raise RoundingAmbiguous(f"entry ({p}, {i}) rounds to a negative count {k}")
                counts[p][i] = k
    try:
        W = DistanceCountMatrix(tuple(map(tuple, counts)), tuple(distances), total)
    except ValueError as exc:
        raise RoundingAmbiguous(f"recovered counts are inconsistent: {exc}") from exc
    return RecoveryReport(W, worst, tau, eps, shift, rows)


def _show(x) -> str:
    return str(x) if isinstance(x, Fraction) else mpmath.nstr(x, 8)


def _check_reduction_spec(spec: CountingMatrixSpec):
    if spec.size != len(spec.beta):
        raise ValueError("counting matrix must be square")
    if not spec.beta_is_identity:
        raise ValueError("the reduction needs beta_p = p")


def _check_reach(inst: BCPInstance, top: int):
    far = int(inst.distances().max())
    if far > top:
        raise K.DomainError(f"squared distance {far} has no column; this spec covers 0..{top}")


def recover_with_report(inst: BCPInstance, spec: CountingMatrixSpec, oracle: KDEOracle,
                        eps=None) -> RecoveryReport:
    """Recover ``W`` and report the rounding margin, ``tau`` and ``eps`` used.

    Row ``r`` of ``W`` counts squared distance ``index_set[r] - shift``;
    for the ``D x D`` layouts (columns ``1..D``) the instance is padded
    with one coordinate (1 on the x side, 0 on the y side) so that
    distance 0 maps to column 1.
    """
    _check_reduction_spec(spec)
    shift = reduction_shift(spec)
    _check_reach(inst, spec.index_set[-1] - shift)
    work = inst if shift == 0 else BCPInstance(inst.X.padded(1, shift), inst.Y.padded(0, shift),
                                               inst.D + shift)
    n = inst.Y.n
    tau_m, budget = reduction_budget(spec, n)
    eps = budget if eps is None else eps
    ones = [1] * inst.Y.n
    # lift against the spec's full cap so every row is a valid kernel input
    lift_inst = BCPInstance(work.X, work.Y, spec.index_set[-1])
    rows = [list(oracle(lift_points(lift_inst, l, spec), ones, eps)) for l in range(spec.size)]
    inv = counting_inverse(spec)
    distances = [p - shift for p in spec.index_set]
    return _solve_and_round(spec, inv, rows, inst.X.n, n, distances, eps, tau_m, shift)


def recover_distance_counts(inst: BCPInstance, spec: CountingMatrixSpec,
                            oracle: KDEOracle) -> DistanceCountMatrix:
    return recover_with_report(inst, spec, oracle).W


def bcp_via_kde(inst: BCPInstance, spec: CountingMatrixSpec, oracle: KDEOracle) -> int:
    return recover_distance_counts(inst, spec, oracle).min_distance()


def pd_recover_with_report(inst: BCPInstance, spec: CountingMatrixSpec, oracle: KDEOracle,
                           eps=None) -> RecoveryReport:
    """Variant for a completely monotone ``f`` through ``g(x) = f(1 - x)``.

    ``spec`` describes ``g``; the oracle evaluates ``f``.  Row ``p`` of the
    result counts squared distance ``D - p``.
    """
    _check_reduction_spec(spec)
    _check_reach(inst, spec.D - spec.index_set[0])
    n = inst.Y.n
    tau_m, budget = reduction_budget(spec, n)
    eps = budget if eps is None else eps
    ones = [1] * inst.Y.n
    rows = [list(oracle(pd_lift_points(inst, l, spec), ones, eps)) for l in range(spec.size)]
    inv = counting_inverse(spec)
    distances = [spec.D - p for p in spec.index_set]
    return _solve_and_round(spec, inv, rows, inst.X.n, n, distances, eps, tau_m, 0)


def pd_recover_distance_counts(inst: BCPInstance, spec: CountingMatrixSpec,
                               oracle: KDEOracle) -> DistanceCountMatrix:
    return pd_recover_with_report(inst, spec, oracle).W


def pd_bcp_via_kde(inst: BCPInstance, spec: CountingMatrixSpec, oracle: KDEOracle) -> int:
    return pd_recover_distance_counts(inst, spec, oracle).min_distance()


# --- single-threshold decision reduction ------------------------------------

def _kernel_prec(f: K.KernelDescriptor, prec):
    return None if f.exact and prec is None else (prec or DEFAULT_PREC)


def rapid_decay_gap(f: K.KernelDescriptor, n: int, p: int, D: int, prec=None,
                    mu=None) -> Scalar:
    """``f(p/D) - n f(q/D)`` with ``q = p + 1`` (or ``(1 + mu) p``)."""
    prec = _kernel_prec(f, prec)
    with mpmath.workprec(prec or DEFAULT_PREC):
        near = Fraction(p, D)
        far = Fraction(p + 1, D) if mu is None else (1 + Fraction(mu)) * Fraction(p, D)
        if far > 1:
            raise K.DomainError(f"far threshold {far} lies outside [0, 1]")
        return K.eval_f(f, near, prec) - n * K.eval_f(f, far, prec)


def bis_decision_reduction(inst: BCPInstance, f: K.KernelDescriptor, p: int,
                           oracle: KDEOracle, prec: int | None = None) -> bool:
    """Is the closest pair within squared distance ``p``?  One oracle call.

    Points are scaled by ``D^(-1/2)``; if some pair is within ``p`` the row
    of its x point is at least ``f(p/D)``, otherwise every row is at most
    ``n f((p+1)/D)``, and the oracle's error stays under a third of the gap.
    """
    D = inst.D
    if p < 0:
        return False
    if p >= D:
        return True
    prec = _kernel_prec(f, prec)
    gap = rapid_decay_gap(f, inst.n, p, D, prec)
    if gap <= 0:
        raise RapidDecayViolated(f"n f({p + 1}/{D}) >= f({p}/{D}) for n={inst.n}")
    with mpmath.workprec(prec or DEFAULT_PREC):
        eps = gap / (3 * inst.n)
        threshold = K.eval_f(f, Fraction(p, D), prec) - gap / 2
        lifted = LiftedInstance(inst.X.array(), inst.Y.array(), Fraction(1, D), Fraction(0), prec)
        v = oracle(lifted, [1] * inst.Y.n, eps)
        return max(v) >= threshold


def bis_min_distance(inst: BCPInstance, f: K.KernelDescriptor, oracle: KDEOracle,
                     prec: int | None = None) -> int:
    """Binary search over ``p`` in ``[0, D]`` using the decision reduction."""
    lo, hi = 0, inst.D
    while lo < hi:
        mid = (lo + hi) // 2
        if bis_decision_reduction(inst, f, mid, oracle, prec):
            hi = mid
        else:
            lo = mid + 1
    return lo


def bis_approx_decision(inst: BCPInstance, f: K.KernelDescriptor, p: int, mu,
                        oracle: KDEOracle, prec: int | None = None) -> bool:
    """Distinguish ``min <= p`` (True) from ``min >= (1 + mu) p`` (False)."""
    D = inst.D
    if p >= D:
        return True
    prec = _kernel_prec(f, prec)
    gap = rapid_decay_gap(f, inst.n, p, D, prec, mu=mu)
    if gap <= 0:
        raise RapidDecayViolated(f"n f((1+mu) {p}/{D}) >= f({p}/{D}) for n={inst.n}")
    with mpmath.workprec(prec or DEFAULT_PREC):
        eps = gap / (3 * inst.n)
        threshold = K.eval_f(f, Fraction(p, D), prec) - gap / 2
        lifted = LiftedInstance(inst.X.array(), inst.Y.array(), Fraction(1, D), Fraction(0), prec)
        return max(oracle(lifted, [1] * inst.Y.n, eps)) >= threshold


def hamming_ball_scan(inst: BCPInstance, p: int) -> bool:
    """Lookup-table arm: probe every 0/1 vector within Hamming distance ``p`` of each x."""
    table = set(inst.Y.points)
    m = inst.X.m
    for x in inst.X.points:
        for r in range(min(p, m) + 1):
            for flips in itertools.combinations(range(m), r):
                probe = list(x)
                for k in flips:
                    probe[k] ^= 1
                if tuple(probe) in table:
                    return True
    return False


# --- integer OV to l2-BCP ---------------------------------------------------

def tensor_lift(x: Sequence[int], negate: bool = False) -> tuple[int, ...]:
    """``[x_k x_l]`` over all ordered pairs, negated for the y side."""
    s = -1 if negate else 1
    return tuple(s * a * b for a in x for b in x)


def lift_identity_holds(x: Sequence[int], y: Sequence[int]) -> bool:
    """``|u_x - v_y|^2 == |u_x|^2 + |v_y|^2 + 2 <x, y>^2`` in integers."""
    u, v = tensor_lift(x), tensor_lift(y, negate=True)
    lhs = sum((a - b) ** 2 for a, b in zip(u, v))
    ip = sum(a * b for a, b in zip(x, y))
    return lhs == sum(a * a for a in u) + sum(b * b for b in v) + 2 * ip * ip


def _default_bcp(U: PointSet, V: PointSet) -> int:
    return _backend.min_sqdist_int(U.array(), V.array())


def zov_to_bcp(X: PointSet, Y: PointSet,
               bcp: Callable[[PointSet, PointSet], int] | None = None) -> bool:
    """Decide integer OV with one closest-pair call per pair of norm classes."""
    bcp = bcp or _default_bcp
    groups_u: dict[int, list] = {}
    groups_v: dict[int, list] = {}
    for x in X.points:
        u = tensor_lift(x)
        groups_u.setdefault(sum(a * a for a in u), []).append(u)
    for y in Y.points:
        v = tensor_lift(y, negate=True)
        groups_v.setdefault(sum(b * b for b in v), []).append(v)
    for s in sorted(groups_u):
        for t in sorted(groups_v):
            if bcp(PointSet(tuple(groups_u[s])), PointSet(tuple(groups_v[t]))) == s + t:
                return True
    return False


def random_instance(rng, n: int, m: int, hamming: bool = True, E: int = 1) -> BCPInstance:
    """Random BCP instance; ``hamming`` gives 0/1 vectors with ``D = m``."""
    lo, hi = (0, 1) if hamming else (-E, E)
    X = [tuple(rng.randint(lo, hi) for _ in range(m)) for _ in range(n)]
    Y = [tuple(rng.randint(lo, hi) for _ in range(m)) for _ in range(n)]
    D = m if hamming else m * (hi - lo) ** 2
    return BCPInstance(PointSet(tuple(X)), PointSet(tuple(Y)), D)


def iter_pairs(X: PointSet, Y: PointSet) -> Iterable[tuple]:
    return itertools.product(X.points, Y.points)
