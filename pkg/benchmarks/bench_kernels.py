"""Timing comparison of the numba kernels against their numpy fallbacks.

Each batched kernel in padicdyn.backends dispatches on PADIC_DYN_BACKEND.
This script times both code paths on identical inputs, checks that they
return identical results, and reports best-of-N wall times.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --rows 20000 --repeats 5
"""

import argparse
import os
import time

import numpy as np

from padicdyn import backends


def _time_best(fn, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def run_backend(name, jobs, repeats):
    os.environ["PADIC_DYN_BACKEND"] = name
    backends.warmup()
    out = {}
    for label, fn in jobs:
        out[label] = _time_best(fn, repeats)
    return out


def build_jobs(rows, rng):
    p, depth = 7, 3
    mod = p ** depth
    coeffs = rng.integers(0, mod, size=(rows, 9))
    values = rng.integers(0, mod, size=(rows, mod))
    tables = backends.poly_tables(coeffs, mod, mod)
    return [
        ("poly_tables", lambda: backends.poly_tables(coeffs, mod, mod)),
        ("mahler_batch", lambda: backends.mahler_batch(values, mod)),
        ("transitive_scan", lambda: backends.transitive_scan(tables)),
        ("bipro_scan", lambda: backends.bipro_scan(13, 3)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=4000,
                    help="batch size for the table kernels")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not backends.HAVE_NUMBA:
        print("numba not importable; only the numpy path can run")
        names = ["numpy"]
    else:
        names = ["numpy", "numba"]

    rng = np.random.default_rng(args.seed)
    jobs = build_jobs(args.rows, rng)
    results = {name: run_backend(name, jobs, args.repeats) for name in names}

    print(f"rows={args.rows} repeats={args.repeats}")
    print(f"{'kernel':<16}" + "".join(f"{n:>12}" for n in names) +
          ("     speedup" if len(names) == 2 else ""))
    mismatch = False
    for label, _ in jobs:
        line = f"{label:<16}"
        timings = []
        outputs = []
        for name in names:
            best, out = results[name][label]
            timings.append(best)
            outputs.append(out)
            line += f"{best:>11.4f}s"
        if len(outputs) == 2:
            a, b = outputs
            if label == "bipro_scan":
                same = a == b
            else:
                same = np.array_equal(a, b)
            if not same:
                mismatch = True
                line += "   RESULTS DIFFER"
            else:
                line += f"{timings[0] / timings[1]:>11.1f}x"
        print(line)
    if mismatch:
        raise SystemExit("backend outputs disagree")


if __name__ == "__main__":
    main()
