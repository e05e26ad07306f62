"""Command-line experiments.

Every subcommand writes a table (CSV by default, or JSON with ``--format
json``) to stdout or ``--output``.  The header records the package
version, seed and precision; wall-clock time lives only in the header so
the data rows are byte-identical across runs with the same arguments.

Exit codes: 0 when every check passes, 2 on a property violation, 1 on a
usage error or an infeasible configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from . import counting as CM
from . import kernels as K
from . import reductions as R
from . import schur as S
from . import solvers as SV
from .numerics import DEFAULT_PREC, check_prec, fmt

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- output -------------------------------------------------------------------

def _cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (tuple, list)):
        return " ".join(_cell(v) for v in x)
    if isinstance(x, (np.floating,)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return fmt(x)


def render(columns, rows, meta, fmt_name: str) -> str:
    rows = [[_cell(v) for v in r] for r in rows]
    if fmt_name == "json":
        body = {"meta": meta, "columns": list(columns), "rows": rows}
        return json.dumps(body, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key in sorted(meta):
        buf.write(f"# {key}: {meta[key]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def data_rows(text: str) -> list[str]:
    """The lines of a CSV or JSON report that must be reproducible."""
    if text.lstrip().startswith("{"):
        body = json.loads(text)
        return [json.dumps(body["columns"])] + [json.dumps(r) for r in body["rows"]]
    return [line for line in text.splitlines() if not line.startswith("#")]


# --- subcommands --------------------------------------------------------------

def cmd_schur_check(args):
    """Cauchy vs Littlewood definitions, Weyl dimension, principal specialization."""
    cols = ["partition", "m", "tableaux", "weyl", "cauchy_eq_littlewood",
            "ps_q2", "ps_q3", "ps_q1/2", "pass"]
    rows, ok = [], True
    for m in range(1, args.max_parts + 1):
        u = [Fraction(k + 2, k + 3) + k for k in range(m)]
        for lam in S.partitions_up_to(args.max_weight, m):
            count = len(S.enumerate_ssyt(lam))
            weyl = S.weyl_dimension(lam)
            same = S.schur_cauchy(lam, u) == S.schur_littlewood(lam, u)
            ps = []
            for q in (Fraction(2), Fraction(3), Fraction(1, 2)):
                geo = [q ** i for i in range(m)]
                ps.append(S.principal_specialization(lam, q) == S.schur_littlewood(lam, geo))
            good = same and weyl == count and all(ps)
            ok &= good
            rows.append([lam, m, count, weyl, same, *ps, good])
    return cols, rows, ok, {}


def _tau_case(kernel: K.KernelDescriptor, D: int, prec):
    if kernel.family == "gaussian":
        spec = CM.gaussian_spec(D, kernel.scale, prec)
        bound = CM.gaussian_tau_bound(D, kernel.scale, spec.prec)
    elif kernel.family == "tstudent":
        spec = CM.tstudent_spec(D, kernel.param["rho"], prec)
        bound = CM.tstudent_tau_bound(D, kernel.param["rho"], spec.prec)
    elif kernel.family in ("reflected-rq", "rq", "cauchy"):
        sigma = kernel.param["sigma"]
        spec = CM.rq_spec(D, sigma, prec=prec)
        bound = CM.rq_tau_bound(D, sigma, spec.prec)
    else:
        raise UsageError(f"no tau bound for kernel {kernel.name}")
    return spec, CM.certify(spec, bound)


def cmd_tau_table(args):
    """Exact tau(M) against the closed-form bound for D = 1..dmax."""
    kernel = _kernel(args.kernel)
    cols = ["D", "tau", "tau_coarse", "bound", "ratio", "precision_bits", "holds"]
    rows, ok = [], True
    for D in range(1, args.dmax + 1):
        spec, cert = _tau_case(kernel, D, args.precision)
        ok &= cert.holds
        rows.append([D, cert.tau, cert.tau_coarse, cert.bound, cert.ratio,
                     "exact" if spec.prec is None else spec.prec, cert.holds])
    return cols, rows, ok, {}


def reduction_setup(kernel: K.KernelDescriptor, m: int, prec=None):
    """Spec, oracle kernel and recovery function for a Hamming instance of dimension m."""
    if kernel.family == "gaussian":
        spec = CM.gaussian_spec(m, kernel.scale, prec)
        return spec, kernel, R.recover_with_report
    if kernel.family == "tstudent":
        return CM.tstudent_spec(m + 1, kernel.param["rho"], prec), kernel, R.recover_with_report
    if kernel.family in ("rq", "cauchy"):
        spec = CM.rq_spec(m + 1, kernel.param["sigma"], prec=prec)
        return spec, kernel, R.pd_recover_with_report
    raise UsageError(f"reduction-demo supports gaussian, tstudent, rq and cauchy, not {kernel.name}")


def run_reduction(inst, kernel, m, noise: str, k=3, seed=0, prec=None):
    """One reduction run; returns (report or None, error text or '')."""
    spec, f, recover = reduction_setup(kernel, m, prec)
    base = R.ExactOracle(f, spec.prec)
    if noise == "none":
        oracle = base
    else:
        signs = R.worst_case_signs(spec)
        scale = 1 if noise == "budget" else Fraction(k)
        oracle = SV.noisy_oracle(base, mode="adversarial", seed=seed, signs=signs, scale=scale)
    try:
        return recover(inst, spec, oracle), ""
    except R.RoundingAmbiguous as exc:
        return None, f"rounding ambiguous: {exc}"


def cmd_reduction_demo(args):
    """Recover the distance histogram through KDE calls and compare with brute force."""
    kernel = _kernel(args.kernel)
    rng = random.Random(args.seed)
    cols = ["trial", "recovered_min", "brute_min", "match", "histogram_match",
            "max_residual", "tau", "eps", "status"]
    rows, ok, failures = [], True, 0
    for t in range(args.trials):
        inst = R.random_instance(rng, args.n, args.m)
        brute = R.brute_force_bcp(inst)
        rep, err = run_reduction(inst, kernel, args.m, args.noise, args.k, args.seed + t,
                                 args.precision)
        if rep is None:
            rows.append([t, "", brute, False, False, "", "", "", err])
            failures += 1
            continue
        hist = R.distance_counts(inst, rep.W.distances)
        good = rep.W.min_distance() == brute and rep.W == hist
        failures += not good
        rows.append([t, rep.W.min_distance(), brute, rep.W.min_distance() == brute,
                     rep.W == hist, rep.max_residual, rep.tau, rep.eps,
                     "ok" if good else "wrong counts"])
    if args.noise != "k-times-budget":
        ok = failures == 0
    return cols, rows, ok, {"noise": args.noise, "failures": failures}


def _points(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    return rng.random((n, m)) / np.sqrt(m)


def cmd_kde_bench(args):
    """Max error of a solver against the naive answer, in units of |u|_1."""
    kernel = _kernel(args.kernel)
    if args.B != 1:
        kernel = K.scale_to_unit(kernel, Fraction(args.B))
    rng = np.random.default_rng(args.seed)
    X, Y = _points(rng, args.n, args.m), _points(rng, args.n, args.m)
    u = rng.standard_normal(args.n)
    exact = SV.naive_kde(X, Y, u, kernel)
    norm = float(np.abs(u).sum())
    degree = ""
    if args.solver == "naive":
        v, size = exact, args.n * args.n
    elif args.solver == "sampling":
        v, size = SV.sampling_kde(X, Y, u, kernel, args.eps, args.seed)
    else:
        p = SV.fit_polynomial(kernel, 1, args.eps)
        fac = SV.build_feature_maps(p, X, Y)
        v, size, degree = SV.poly_kde(X, Y, u, p, factorization=fac), fac.size, p.degree
        if size > SV.feature_bound(args.m, p.degree):
            return _bench_rows(args, kernel, float("nan"), size, degree, False)
    err = float(np.abs(v - exact).max()) / norm if norm else 0.0
    return _bench_rows(args, kernel, err, size, degree, err <= args.eps)


def _bench_rows(args, kernel, err, size, degree, ok):
    cols = ["solver", "kernel", "n", "m", "eps", "max_error_over_l1", "within_eps", "size", "degree"]
    row = [args.solver, kernel.name, args.n, args.m, repr(args.eps), repr(err), ok, size, degree]
    return cols, [row], ok, {}


def cmd_zov_demo(args):
    """Integer OV decided through closest-pair calls on the tensor lift."""
    rng = random.Random(args.seed)
    cols = ["trial", "brute_force", "via_bcp", "agree", "lift_identity"]
    rows, ok = [], True
    for t in range(args.trials):
        X = R.PointSet(tuple(tuple(rng.randint(-args.E, args.E) for _ in range(args.m))
                             for _ in range(args.n)), args.E)
        Y = R.PointSet(tuple(tuple(rng.randint(-args.E, args.E) for _ in range(args.m))
                             for _ in range(args.n)), args.E)
        brute, lifted = R.brute_force_ov(X, Y), R.zov_to_bcp(X, Y)
        ident = all(R.lift_identity_holds(x, y) for x, y in R.iter_pairs(X, Y))
        ok &= brute == lifted and ident
        rows.append([t, brute, lifted, brute == lifted, ident])
    return cols, rows, ok, {}


# --- parser -------------------------------------------------------------------

def _kernel(text: str) -> K.KernelDescriptor:
    try:
        return K.parse_kernel(text)
    except ValueError as exc:
        raise UsageError(f"invalid kernel {text!r}: {exc}") from exc


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _precision(text: str) -> int:
    v = int(text)
    try:
        check_prec(v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kdebounds", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed=True):
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--output", help="write here instead of stdout")
        p.add_argument("--precision", type=_precision, default=None,
                       help=f"big-float bits (default: per kernel, or {DEFAULT_PREC})")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("schur-check", help="Schur identity table",
                       description="Columns: partition, m, tableaux, weyl, "
                                   "cauchy_eq_littlewood, ps_q2, ps_q3, ps_q1/2, pass.")
    p.add_argument("--max-weight", type=int, default=6)
    p.add_argument("--max-parts", type=_positive, default=4)
    common(p, seed=False)
    p.set_defaults(run=cmd_schur_check)

    p = sub.add_parser("tau-table", help="tau(M) against the closed-form bound",
                       description="Columns: D, tau, tau_coarse, bound, ratio, "
                                   "precision_bits, holds.")
    p.add_argument("--kernel", required=True, help="e.g. gaussian:B=2, tstudent:rho=1, rq:sigma=1")
    p.add_argument("--dmax", type=_positive, default=8)
    common(p, seed=False)
    p.set_defaults(run=cmd_tau_table)

    p = sub.add_parser("reduction-demo", help="BCP through KDE with a noisy oracle",
                       description="Columns: trial, recovered_min, brute_min, match, "
                                   "histogram_match, max_residual, tau, eps, status.  With "
                                   "--noise k-times-budget failures are expected and do "
                                   "not change the exit code.")
    p.add_argument("--kernel", default="gaussian:B=1")
    p.add_argument("--n", type=_positive, default=16)
    p.add_argument("--m", type=_positive, default=4)
    p.add_argument("--noise", choices=["none", "budget", "k-times-budget"], default="budget")
    p.add_argument("--k", type=int, default=3, help="noise multiple for k-times-budget")
    p.add_argument("--trials", type=_positive, default=1)
    common(p)
    p.set_defaults(run=cmd_reduction_demo)

    p = sub.add_parser("kde-bench", help="solver error against naive KDE",
                       description="Columns: solver, kernel, n, m, eps, max_error_over_l1, "
                                   "within_eps, size (n^2, |S| or |T|), degree.")
    p.add_argument("--solver", choices=["naive", "sampling", "poly"], default="poly")
    p.add_argument("--kernel", default="gaussian:B=1")
    p.add_argument("--n", type=_positive, default=128)
    p.add_argument("--m", type=_positive, default=4)
    p.add_argument("--B", type=float, default=1.0, help="extra scale applied to the kernel")
    p.add_argument("--eps", type=float, default=1e-3)
    common(p)
    p.set_defaults(run=cmd_kde_bench)

    p = sub.add_parser("zov-demo", help="integer OV through the tensor lift",
                       description="Columns: trial, brute_force, via_bcp, agree, lift_identity.")
    p.add_argument("--n", type=_positive, default=8)
    p.add_argument("--m", type=_positive, default=3)
    p.add_argument("--E", type=_positive, default=2)
    p.add_argument("--trials", type=_positive, default=20)
    common(p)
    p.set_defaults(run=cmd_zov_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "eps", 1) is not None and not 0 < getattr(args, "eps", 0.5) < 1:
        parser.error("--eps must lie in (0, 1)")
    start = time.perf_counter()
    try:
        cols, rows, ok, extra = args.run(args)
    except (UsageError, K.DomainError) as exc:
        print(f"kdebounds: {exc}", file=sys.stderr)
        return EXIT_USAGE
    meta = {
        "command": args.command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "precision": args.precision or f"default ({DEFAULT_PREC} or per-kernel)",
        "wall_time_s": round(time.perf_counter() - start, 3),
        "status": "pass" if ok else "violation",
        **extra,
    }
    text = render(cols, rows, meta, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
