"""Time the RK4 transition kernel: numba versus the numpy loop.

    python3 benchmarks/bench_rk4.py [--steps 4096] [--repeat 5]

The numba path is skipped when LPTV_NO_NUMBA=1 is set.
"""

import argparse
import math
import time

import numpy as np

from lptv import _kernels, catalog


def nodes_for(entry, omega, steps):
    period = 2 * math.pi / omega
    h = period / steps
    ts = 0.5 * h * np.arange(2 * steps + 1)
    return entry.A.to_float().sample(omega, ts), h


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=4096)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"backend selected: {_kernels.BACKEND}")
    for system_id, omega in [("mathieu", 2.0), ("4-4:H", 1.0), ("example-3x3", 1.0)]:
        nodes, h = nodes_for(catalog.get(system_id), omega, args.steps)
        phi0 = np.eye(nodes.shape[1])
        t_np, ref = best_of(lambda: _kernels._rk4_numpy(nodes, h, phi0), args.repeat)
        line = f"{system_id:12s} n={nodes.shape[1]} steps={args.steps}  numpy {t_np * 1e3:8.2f} ms"
        if _kernels.BACKEND == "numba":
            _kernels.rk4(nodes, h, phi0)  # compile outside the timing
            t_nb, out = best_of(lambda: _kernels.rk4(nodes, h, phi0), args.repeat)
            diff = float(np.max(np.abs(out - ref)))
            line += f"  numba {t_nb * 1e3:8.3f} ms  speedup {t_np / t_nb:6.1f}x  max diff {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
