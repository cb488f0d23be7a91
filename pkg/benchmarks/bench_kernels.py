"""Compare the compiled and pure-Python kernels on random graphs.

    python benchmarks/bench_kernels.py [--nodes 200000] [--degree 4] [--repeat 3]
"""

import argparse
import time

import numpy as np

from fpmslice import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=200_000)
    ap.add_argument("--degree", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n, m = args.nodes, args.nodes * args.degree
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    lab = (1 << rng.integers(0, 7, m)).astype(np.uint8)
    indptr, indices, labels = kernels.csr(n, src, dst, lab)
    seeds = rng.choice(n, 8, replace=False).tolist()
    mask = 0b1111100  # C, D, F, S, V

    cases = {
        "reach": lambda b: kernels.reach(indptr, indices, labels, mask, seeds, backend=b),
        "tarjan_scc": lambda b: kernels.tarjan_scc(indptr, indices, backend=b),
        "dag_reach": lambda b: kernels.dag_reach(indptr, indices, seeds, backend=b),
    }
    backends = sorted(kernels.BACKENDS)
    print(f"{n} nodes, {m} edges, best of {args.repeat}")
    print(f"{'kernel':<12}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases.items():
        row = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
        line = f"{name:<12}" + "".join(f"{row[b] * 1000:>10.1f}ms" for b in backends)
        if "compiled" in row:
            line += f"{row['python'] / row['compiled']:>11.1f}x"
        print(line)
    if "compiled" not in kernels.BACKENDS:
        print("compiled backend not built; run `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
