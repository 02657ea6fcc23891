"""Throughput of the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_backends.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from omtl import kernels
from omtl.contenders import Mogd
from omtl.mt_oslssvr import MtOslssvr
from omtl.mt_wrls import MtWrls
from omtl.task_graph import TaskGraph


def _stream(T, d, n, seed=0):
    rng = np.random.default_rng(seed)
    S = np.triu(rng.uniform(0, 1, (T, T)), 1)
    return S + S.T, np.tile(np.arange(T), n // T), rng.standard_normal((n, d)), rng.standard_normal(n)


CASES = {
    "mt-wrls T=10 d=10 (D=100)": lambda S, t, X, Y: MtWrls(TaskGraph.from_similarities(S, 1.0, 1.0), 10, 0.99).run(t, X, Y),
    "mt-oslssvr T=10 d=10 nu=1e-3": lambda S, t, X, Y: MtOslssvr(TaskGraph.from_similarities(S, 1.0, 1.0), 10, 1e-3).run(t, X, Y),
    "mogd T=10 d=10": lambda S, t, X, Y: Mogd(TaskGraph.from_similarities(S, 1.0, 0.1), 10, 0.01).run(t, X, Y),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, default=4000)
    args = ap.parse_args()
    S, tasks, X, Y = _stream(10, 10, args.n)
    print(f"{'case':<32}" + "".join(f"{b:>12}" for b in kernels.available_backends()) + f"{'speedup':>10}")
    for name, fn in CASES.items():
        best = {}
        for backend in kernels.available_backends():
            with kernels.use_backend(backend):
                times = []
                for _ in range(args.repeat):
                    t0 = time.perf_counter()
                    fn(S, tasks, X, Y)
                    times.append(time.perf_counter() - t0)
                best[backend] = min(times)
        speed = best["python"] / best["cython"] if "cython" in best else float("nan")
        print(f"{name:<32}" + "".join(f"{best[b]:>11.4f}s" for b in sorted(best)) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
