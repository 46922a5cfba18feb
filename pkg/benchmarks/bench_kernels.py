"""Compare the compiled and pure-Python power-allocation kernels.

Usage: python benchmarks/bench_kernels.py [--cases 300] [--streams 4]
"""
import argparse
import time

import numpy as np

from relayopt import _kernels_py

try:
    from relayopt import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def make_cases(n_cases, n, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_cases):
        l1 = np.sort(rng.exponential(size=n) * 10 ** rng.uniform(-1, 2))[::-1]
        l2 = np.sort(rng.exponential(size=n) * 10 ** rng.uniform(-1, 2))[::-1]
        out.append((l1, l2))
    return out


def run(backend, cases, n):
    start = np.full(n, 1.0 / n)
    t0 = time.perf_counter()
    results = [backend.alternate(l1, l2, 1.0, 1.0, start, 1e-8, 200) for l1, l2 in cases]
    return time.perf_counter() - t0, results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=300)
    ap.add_argument("--streams", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cases = make_cases(args.cases, args.streams, args.seed)
    t_py, r_py = run(_kernels_py, cases, args.streams)
    print(f"python : {t_py * 1e3 / args.cases:9.3f} ms/allocation")
    if _kernels_cy is None:
        print("cython : extension not built")
        return
    t_cy, r_cy = run(_kernels_cy, cases, args.streams)
    same = all(np.array_equal(a, b) for x, y in zip(r_py, r_cy) for a, b in zip(x, y))
    print(f"cython : {t_cy * 1e3 / args.cases:9.3f} ms/allocation")
    print(f"speedup: {t_py / t_cy:9.1f}x   identical outputs: {same}")


if __name__ == "__main__":
    main()
