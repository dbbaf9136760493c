"""Time the compiled enumeration kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py --sizes 12 16 18 --repeat 3
"""

import argparse
import random
import timeit
from fractions import Fraction

from sigma_lab import kernels


def balance_case(rng, n, cols=4):
    # n rows, each spreading mass over a few columns
    weights = [[Fraction(rng.randint(0, 9), 64) for _ in range(cols)] for _ in range(n)]
    col_tot = [sum((row[b] for row in weights), Fraction(0)) or Fraction(1) for b in range(cols)]
    return weights, col_tot


def sign_case(rng, n, rows=3, cols=4):
    ca = [rng.randrange(rows) for _ in range(n)]
    cb = [rng.randrange(cols) for _ in range(n)]
    w = [Fraction(rng.randint(1, 20), 256) for _ in range(n)]
    rw = [sum(w[k] for k in range(n) if ca[k] == r) or Fraction(1) for r in range(rows)]
    cw = [sum(w[k] for k in range(n) if cb[k] == c) or Fraction(1) for c in range(cols)]
    coef = [w[k] / (rw[ca[k]] * cw[cb[k]]) for k in range(n)]
    return ca, cb, w, rw, cw, coef


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 14, 18])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = ["python"] + (["cython"] if kernels.compiled_available() else [])
    if len(backends) == 1:
        print("compiled kernels not built; timing the Python fallback only")
    rng = random.Random(args.seed)
    print(f"{'kernel':<18}{'n':>4}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for n in args.sizes:
        cases = {
            "subset_balance": (kernels.subset_balance_max, balance_case(rng, n)),
            "sign_l1": (kernels.sign_l1_max, sign_case(rng, n)),
        }
        for name, (fn, case) in cases.items():
            results = {b: fn(*case, backend=b) for b in backends}
            # both backends must agree before their timings mean anything
            assert len({repr(r) for r in results.values()}) == 1, results
            times = {b: best_time(lambda b=b: fn(*case, backend=b), args.repeat) for b in backends}
            row = f"{name:<18}{n:>4}" + "".join(f"{times[b]:>11.4f}s" for b in backends)
            if len(backends) > 1:
                row += f"{times['python'] / max(times['cython'], 1e-9):>11.1f}x"
            print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
