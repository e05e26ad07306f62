"""Time the compiled core against the numpy fallback.

Usage: python3 benchmarks/bench_core.py [--repeat 5] [--sizes 64 256 1024]

Prints one CSV row per (function, size, backend) with the best wall time
over the repeats and the speedup of the compiled core.  Both backends are
checked to agree before anything is timed.
"""
import argparse
import csv
import sys
import timeit

import numpy as np

from kdebounds import _backend
from kdebounds._fallback import GAUSSIAN, RQ


def cases(n: int, m: int, rng: np.random.Generator):
    Xi = rng.integers(0, 2, size=(n, m))
    Yi = rng.integers(0, 2, size=(n, m))
    Xf = rng.random((n, m)) / np.sqrt(m)
    Yf = rng.random((n, m)) / np.sqrt(m)
    u = rng.normal(size=n)
    return {
        "sqdist_int": lambda impl: impl.sqdist_int(Xi, Yi),
        "distance_histogram": lambda impl: impl.distance_histogram(Xi, Yi, m),
        "kde_matvec[gaussian]": lambda impl: impl.kde_matvec(Xf, Yf, u, GAUSSIAN, 1.0, 0.0),
        "kde_matvec[rq]": lambda impl: impl.kde_matvec(Xf, Yf, u, RQ, 1.0, 2.0),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024])
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = _backend.implementations()
    if "compiled" not in impls:
        print("compiled core not built; run `pip install -e . --no-build-isolation`",
              file=sys.stderr)
        return 1
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["function", "n", "m", "python_s", "compiled_s", "speedup"])
    rng = np.random.default_rng(args.seed)
    for n in args.sizes:
        for name, call in cases(n, args.m, rng).items():
            a, b = call(impls["python"]), call(impls["compiled"])
            if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
                print(f"{name}: backends disagree at n={n}", file=sys.stderr)
                return 1
            best = {}
            for key, impl in impls.items():
                best[key] = min(timeit.repeat(lambda: call(impl), number=1, repeat=args.repeat))
            out.writerow([name, n, args.m, f"{best['python']:.6f}", f"{best['compiled']:.6f}",
                          f"{best['python'] / best['compiled']:.2f}"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
