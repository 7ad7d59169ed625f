"""Compiled vs pure-Python trajectory kernel.

    python3 benchmarks/bench_kernel.py [--trajectories 200] [--repeat 3]

Both kernels get identical bit generators, so the outputs must agree to
rounding; the script checks that before reporting timings.
"""

import argparse
import time

import numpy as np

from rpnbound.trajectory import LossRates, channel_table, coherent_state
from rpnbound.trajectory import _kernel_py

try:
    from rpnbound.trajectory import _kernel
except ImportError:
    _kernel = None

CASES = {
    "N=20 mixed": (20, LossRates(gamma1=0.05, gamma2=0.02, gamma11=0.01, gamma12=0.01, gamma111=1e-3), 2.0),
    "N=100 two-body": (100, LossRates(gamma11=1e-3, gamma12=5e-4, gamma22=2e-4), 2.0),
    "N=400 single-body": (400, LossRates(gamma1=0.01, gamma2=0.01), 1.0),
}


def run(kernel, N, rates, T, count, seed):
    table = channel_table(rates)
    n_tot = np.full(count, N, dtype=np.int64)
    amps = np.zeros((count, N + 1), dtype=complex)
    amps[:, :] = coherent_state(N)
    gens = [np.random.PCG64(np.random.SeedSequence([seed, i])) for i in range(count)]
    t0 = time.perf_counter()
    logs = kernel.evolve(n_tot, amps, T, 0.3, 0.05, 0.001, table.p, table.q, table.gamma, gens)
    return time.perf_counter() - t0, n_tot, amps, logs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trajectories", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernel is None:
        print("compiled kernel not built; only the Python kernel is available")
        return
    print(f"{'case':<20} {'python s':>10} {'cython s':>10} {'speedup':>8} {'jumps':>7} {'max |d amp|':>12}")
    for name, (N, rates, T) in CASES.items():
        tp = min(run(_kernel_py, N, rates, T, args.trajectories, 1)[0] for _ in range(args.repeat))
        tc = min(run(_kernel, N, rates, T, args.trajectories, 1)[0] for _ in range(args.repeat))
        _, n1, a1, l1 = run(_kernel_py, N, rates, T, args.trajectories, 1)
        _, n2, a2, l2 = run(_kernel, N, rates, T, args.trajectories, 1)
        assert np.array_equal(n1, n2)
        assert [[j for _, j in l] for l in l1] == [[j for _, j in l] for l in l2]
        jumps = sum(len(l) for l in l1)
        print(f"{name:<20} {tp:>10.4f} {tc:>10.4f} {tp / tc:>8.1f} {jumps:>7d} {np.abs(a1 - a2).max():>12.2e}")


if __name__ == "__main__":
    main()
