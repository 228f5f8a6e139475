"""Compare the numba and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--h 0.1] [--R 3.0] [--sweeps 20]

Times single Jacobi sweeps on the given grid and one oracle query along
the a-axis, once per backend, after a warm-up call that absorbs the JIT
compile.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from su2synth import _accel
from su2synth.dynamics import make_control_set
from su2synth.oracle import dijkstra_min_time
from su2synth.solver import SolverConfig, build_grid, initial_field, sweep_flat, sweep_tables
from su2synth.su2 import exp_map


def time_sweeps(tables, S, sweeps, use_numba):
    sweep_flat(S, tables, use_numba)  # warm-up
    t0 = time.perf_counter()
    for _ in range(sweeps):
        S, _ = sweep_flat(S, tables, use_numba)
    return (time.perf_counter() - t0) / sweeps, S


def time_oracle(x, h_o, use_numba):
    U = exp_map(np.asarray(x, dtype=float))
    dijkstra_min_time(exp_map(np.array([0.2, 0, 0])), h_o=h_o, tau=h_o, use_numba=use_numba)
    t0 = time.perf_counter()
    res = dijkstra_min_time(U, h_o=h_o, tau=h_o, use_numba=use_numba)
    return time.perf_counter() - t0, res


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--h", type=float, default=0.1)
    p.add_argument("--R", type=float, default=3.0)
    p.add_argument("--sweeps", type=int, default=20)
    p.add_argument("--oracle-h", type=float, default=0.1)
    args = p.parse_args()

    cfg = SolverConfig(h=args.h, R=args.R)
    grid = build_grid(cfg)
    tables = sweep_tables(grid, make_control_set(cfg.n_dir))
    S0 = initial_field(cfg, grid).S.ravel(order="F")
    print("grid %s, %d interior cells, %d directions" % (grid.dims, tables.interior.size,
                                                         cfg.n_dir))
    backends = [False] + ([True] if _accel.HAS_NUMBA else [])
    sweep_t, results = {}, {}
    for use in backends:
        sweep_t[use], results[use] = time_sweeps(tables, S0, args.sweeps, use)
        print("sweep  %-6s %8.1f ms/sweep" % ("numba" if use else "numpy", 1e3 * sweep_t[use]))
    if len(backends) == 2:
        diff = np.abs(results[True] - results[False]).max()
        print("sweep  speedup %.1fx, max |difference| %.1e" % (sweep_t[False] / sweep_t[True], diff))

    oracle_t = {}
    for use in backends:
        oracle_t[use], res = time_oracle([1.0, 0, 0], args.oracle_h, use)
        print("oracle %-6s %8.3f s  (T = %.3f, %d nodes)" % ("numba" if use else "python",
                                                             oracle_t[use], res.time,
                                                             res.settled_nodes))
    if len(backends) == 2:
        print("oracle speedup %.1fx" % (oracle_t[False] / oracle_t[True]))


if __name__ == "__main__":
    main()
