"""Time the compiled Bloch kernel against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--trials N] [--steps M]

Runs the same random field histories through every available backend and
prints per-backend wall time plus the speedup of the compiled extension.
The workload mirrors the Monte Carlo hot loop: many trials, each with its
own piecewise-constant field history.
"""

import argparse
import time

import numpy as np

from qsense._kernels import available_backends


def time_backend(fn, bloch, fields, dt, repeats):
    best = float("inf")
    for _ in range(repeats):
        work = np.ascontiguousarray(bloch.copy())
        t0 = time.perf_counter()
        fn(work, fields, dt, num_threads=1)
        best = min(best, time.perf_counter() - t0)
    return best, work


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=2048)
    parser.add_argument("--steps", type=int, default=400)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    bloch = rng.normal(size=(args.trials, 3))
    bloch /= np.linalg.norm(bloch, axis=1, keepdims=True)
    fields = np.ascontiguousarray(
        rng.normal(size=(args.trials, args.steps, 3)) * 2.0)
    dt = 0.01

    backends = available_backends()
    print(f"workload: {args.trials} trials x {args.steps} steps, "
          f"best of {args.repeats}")
    results = {}
    outputs = {}
    for name, fn in sorted(backends.items()):
        elapsed, out = time_backend(fn, bloch, fields, dt, args.repeats)
        results[name] = elapsed
        outputs[name] = out
        rate = args.trials * args.steps / elapsed / 1e6
        print(f"  {name:10s} {elapsed * 1e3:9.2f} ms   "
              f"{rate:7.1f} Msteps/s")

    if "compiled" in results and "python" in results:
        diff = np.max(np.abs(outputs["compiled"] - outputs["python"]))
        print(f"  speedup    {results['python'] / results['compiled']:9.2f}x"
              f"   (max deviation {diff:.2e})")


if __name__ == "__main__":
    main()
