"""Compare the numba and numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--traces 20000] [--length 200] [--repeat 5]

Each backend runs in a fresh interpreter because the backend is chosen at
import time from ``QFMINE_BACKEND``.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from qfmine import _kernels

traces, length, acts, repeat = map(int, sys.argv[1:5])
rng = np.random.default_rng(0)
codes = rng.integers(0, acts, traces * length)
offsets = np.arange(0, traces * length + 1, length, dtype=np.int64)
samples = rng.random((traces, 500))

def best(fn):
    fn()  # warm-up, includes JIT compilation for numba
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

def merge():
    count = np.zeros(500, dtype=np.int64)
    mean, m2 = np.zeros(500), np.zeros(500)
    for i in range(0, traces, 20):
        _kernels.merge_moments(count, mean, m2, samples[i:i + 20])

print(json.dumps({
    "backend": _kernels.BACKEND,
    "dfg_counts": best(lambda: _kernels.dfg_counts(codes, offsets, acts)),
    "merge_moments": best(merge),
}))
"""


def run(backend: str, args) -> dict | None:
    env = dict(os.environ, QFMINE_BACKEND=backend)
    res = subprocess.run(
        [sys.executable, "-c", CHILD, str(args.traces), str(args.length), str(args.activities), str(args.repeat)],
        env=env, capture_output=True, text=True,
    )
    if res.returncode != 0:
        print(f"{backend}: unavailable ({res.stderr.strip().splitlines()[-1]})", file=sys.stderr)
        return None
    return json.loads(res.stdout)


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--traces", type=int, default=20000)
    p.add_argument("--length", type=int, default=200)
    p.add_argument("--activities", type=int, default=40)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    results = [r for r in (run(b, args) for b in ("numpy", "numba")) if r]
    print(f"{'backend':<8} {'dfg_counts':>12} {'merge_moments':>14}")
    for r in results:
        print(f"{r['backend']:<8} {r['dfg_counts']:>11.4f}s {r['merge_moments']:>13.4f}s")
    if len(results) == 2:
        a, b = results
        print(f"speedup  {a['dfg_counts'] / b['dfg_counts']:>11.1f}x {a['merge_moments'] / b['merge_moments']:>13.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
