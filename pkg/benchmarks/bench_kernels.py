"""Time the all-pairs distance kernels: compiled extension vs numpy fallback.

    python benchmarks/bench_kernels.py [--out bench.csv] [--repeat 3]

Both backends must return the same integer; the script aborts otherwise.
"""
from __future__ import annotations

import argparse
import csv
import sys
import time

from stathyp.groups import parse_group
from stathyp.kernels import available_backends, pair_distance_sum
from stathyp.spheres import enumerate_sphere

CASES = [
    ("free(2)", 6),
    ("free(2)", 7),
    ("abelian(2)", 200),
    ("free_product(abelian(2),free(1))", 5),
    ("free_product(abelian(2),free(1))", 6),
    ("direct(free(2),cyclic(3))", 6),
]


def bench(spec, elements, backend, repeat):
    best, value = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = pair_distance_sum(spec, elements, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="CSV path (stdout when omitted)")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = available_backends()
    rows = []
    for text, n in CASES:
        spec = parse_group(text)
        elements = enumerate_sphere(spec, n).elements
        timings = {}
        values = set()
        for b in backends:
            timings[b], v = bench(spec, elements, b, args.repeat)
            values.add(v)
        if len(values) != 1:
            sys.exit(f"backends disagree on {text} n={n}: {values}")
        speedup = timings["python"] / timings["cython"] if "cython" in timings else float("nan")
        rows.append([text, n, len(elements), len(elements) ** 2,
                     *(f"{timings.get(b, float('nan')):.6f}" for b in ("cython", "python")),
                     f"{speedup:.2f}"])

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["spec", "n", "elements", "pairs", "cython_s", "python_s", "speedup"])
    w.writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
