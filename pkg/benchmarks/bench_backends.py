"""Timing comparison of the compiled and pure-Python backends.

Runs the four hot kernels on identical workloads and prints a table of
best-of-five wall times with the speedup of the compiled path.  Usage:

    python benchmarks/bench_backends.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

from shiftwaring._backend import load_backend


def _best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads():
    golden = 0.6180339887498949
    yield "f_point x200", lambda b: [
        b.f_point(0.31 + 1e-4 * i, golden, 0.0, 4000.0, 3)
        for i in range(200)]
    yield "f_grid 20k pts", lambda b: b.f_grid(
        golden, 0.0, 3, 4000.0, -0.5, 5e-5, 20_000)
    yield "enum_count P=160 s=2", lambda b: b.enum_count(
        [(golden, 0.0), (0.5, 0.0)], 2, 1.0, 19_000.0,
        [160, 160], True, 10 ** 9, 1, 160)
    yield "psi_avg P=60k", lambda b: b.psi_avg(0.37, 0.11, 60_000.0, 2)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = []
    for name in ("c", "py"):
        try:
            backends.append((name, load_backend(name)))
        except ImportError as exc:
            print(f"backend {name!r} unavailable: {exc}")
    if len(backends) < 2:
        print("need both backends for a comparison; showing what ran")

    width = max(len(label) for label, _ in _workloads())
    header = f"{'workload':<{width}}  " + "".join(
        f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, work in _workloads():
        times = [_best_of(lambda b=be: work(b), args.repeats)
                 for _, be in backends]
        row = f"{label:<{width}}  " + "".join(
            f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2 and times[0] > 0:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
