"""Compare the compiled and pure-Python echelon kernels.

Two measurements:

* kernel: feed the same random rows modulo a word-size prime into both
  ``ModEchelon`` implementations and time the incremental elimination;
* workload: run one dimension estimate end to end in a subprocess, once
  with the default backend and once with ``QHOL_FORCE_PYTHON=1``.

Usage: ``python benchmarks/bench_kernels.py [--sizes 100 200 400] [--repeat 3]``
"""

from __future__ import annotations

import argparse
import json
import os
import random
import statistics
import subprocess
import sys
import time

from qhol import linalg
from qhol.domains import PRIMES

WORKLOAD = (
    "import time\n"
    "from qhol import linalg\n"
    "from qhol.analysis import dimension_estimate\n"
    "from qhol.catalog import builtin\n"
    "t = time.perf_counter()\n"
    "rep = dimension_estimate(builtin('cex'))\n"
    "print(linalg.BACKEND, time.perf_counter() - t, rep.ranks[-1])\n"
)


def time_kernel(cls, rows: list[list[int]], ncols: int, p: int, repeat: int) -> tuple[float, int]:
    times, rank = [], 0
    for _ in range(repeat):
        start = time.perf_counter()
        ech = cls(ncols, p)
        for row in rows:
            ech.add_row(row)
        times.append(time.perf_counter() - start)
        rank = ech.rank
    return statistics.median(times), rank


def kernel_bench(sizes: list[int], repeat: int, seed: int) -> list[dict]:
    p = PRIMES[0]
    rng = random.Random(seed)
    out = []
    for n in sizes:
        # rank-deficient input so that both the pivot and the reduce-to-zero paths run
        basis = [[rng.randrange(p) for _ in range(n)] for _ in range(n // 2)]
        rows = []
        for _ in range(n):
            a, b = rng.sample(basis, 2)
            c = rng.randrange(p)
            rows.append([(x + c * y) % p for x, y in zip(a, b)])
        t_py, r_py = time_kernel(linalg.PyModEchelon, rows, n, p, repeat)
        entry = {"columns": n, "rows": n, "python_s": t_py, "rank": r_py}
        if linalg.BACKEND == "compiled":
            t_c, r_c = time_kernel(linalg.ModEchelon, rows, n, p, repeat)
            if r_c != r_py:
                raise SystemExit(f"backends disagree on the rank at size {n}: {r_c} != {r_py}")
            entry.update(compiled_s=t_c, speedup=t_py / t_c if t_c else float("inf"))
        out.append(entry)
    return out


def workload_bench() -> list[dict]:
    out = []
    for force in ("0", "1"):
        env = dict(os.environ, QHOL_FORCE_PYTHON=force)
        proc = subprocess.run([sys.executable, "-c", WORKLOAD], env=env, capture_output=True, text=True, check=True)
        backend, seconds, rank = proc.stdout.split()
        out.append({"backend": backend, "seconds": float(seconds), "final_rank": int(rank)})
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--no-workload", action="store_true", help="skip the end-to-end subprocess runs")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    result = {"backend": linalg.BACKEND, "kernel": kernel_bench(args.sizes, args.repeat, args.seed)}
    if not args.no_workload:
        result["workload"] = workload_bench()
    if args.json:
        print(json.dumps(result, indent=2))
        return 0
    print(f"default backend: {result['backend']}")
    print(f"{'size':>6} {'python (s)':>12} {'compiled (s)':>13} {'speedup':>8}")
    for e in result["kernel"]:
        comp = f"{e['compiled_s']:13.4f}" if "compiled_s" in e else f"{'n/a':>13}"
        speed = f"{e['speedup']:8.1f}" if "speedup" in e else f"{'n/a':>8}"
        print(f"{e['columns']:>6} {e['python_s']:12.4f} {comp} {speed}")
    for w in result.get("workload", []):
        print(f"dimension estimate of cex with the {w['backend']} backend: {w['seconds']:.2f}s (final rank {w['final_rank']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
