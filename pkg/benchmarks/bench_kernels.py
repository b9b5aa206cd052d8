"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--grid 400] [--ladder 60] [--steps 20000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from optoscatter import kernels


def bench_grid(core, n, repeat):
    axis = np.linspace(-6, 6, n)
    dc, da = (a.ravel() for a in np.meshgrid(axis, axis, indexing="ij"))
    call = lambda: core.rate_grid(2.0, 7.0, 0.05, 0.1, 1.0, False, dc, da)  # noqa: E731
    call()
    return min(timeit.repeat(call, number=1, repeat=repeat)), call()


def bench_ladder(core, M, steps, repeat):
    p0 = np.zeros(M + 1)
    p0[5] = 1.0
    dt = 0.05 / (M * 1.3)
    call = lambda: core.birth_death_rk4(0.3, 1.0, p0, dt, steps, steps)  # noqa: E731
    call()
    return min(timeit.repeat(call, number=1, repeat=repeat)), call()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=400, help="points per detuning axis")
    ap.add_argument("--ladder", type=int, default=60, help="top phonon level")
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the numpy kernels only")
    results = {}
    for name in backends:
        core = kernels.get_backend(name)
        results[name] = (bench_grid(core, args.grid, args.repeat),
                         bench_ladder(core, args.ladder, args.steps, args.repeat))

    print(f"{'kernel':<34}{'backend':<10}{'best [s]':>12}{'speed-up':>10}")
    labels = (f"rate_grid {args.grid}x{args.grid}", f"birth_death_rk4 M={args.ladder} x{args.steps}")
    for k, label in enumerate(labels):
        ref = results["python"][k][0]
        for name in backends:
            t = results[name][k][0]
            print(f"{label:<34}{name:<10}{t:>12.4g}{ref / t:>10.1f}")
    if len(backends) == 2:
        grid_same = np.array_equal(results["cython"][0][1], results["python"][0][1], equal_nan=True)
        ladder_diff = np.abs(results["cython"][1][1] - results["python"][1][1]).max()
        print(f"rate_grid outputs bit-identical: {grid_same}; ladder max abs difference: {ladder_diff:.1e}")


if __name__ == "__main__":
    main()
