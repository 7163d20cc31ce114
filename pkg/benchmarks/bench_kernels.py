#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-python fallback.

Times the environment-recurrence chain (the Metropolis proposal hot path)
and the Cholesky log-determinant on representative chain geometries, plus
a full sampler sweep through the public dispatch.  Run after `pip install
-e .`:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from fsmps import _kernels_py, kernels
from fsmps.linalg import RngStream
from fsmps.mps import bond_profile, sample_rmps


def time_call(fn, *args, repeat=200):
    best = np.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_env_chain(n_sites, d, dmax):
    profile = bond_profile(n_sites, d, dmax)
    state = sample_rmps(profile, RngStream(0))
    tensors = state.sites[1:]
    gamma = np.ones((1, 1), dtype=np.complex128)
    t_fast = time_call(kernels.env_chain, tensors, gamma)
    t_ref = time_call(_kernels_py.env_chain, tensors, gamma)
    return t_fast, t_ref


def bench_logdet(n):
    rng = RngStream(1)
    a = rng.complex_normal((n, n))
    g = a @ a.conj().T
    g /= np.trace(g).real
    t_fast = time_call(kernels._chol_logdet, g, repeat=2000)
    t_ref = time_call(_kernels_py.chol_logdet, g, repeat=2000)
    return t_fast, t_ref


def bench_sweep(n_sites, d, dmax):
    from fsmps.sampler import init_chain, sweep
    state = init_chain(bond_profile(n_sites, d, dmax), RngStream(2), 0.1)
    return time_call(sweep, state, repeat=30)


def main():
    print(f"active backend: {kernels.BACKEND}")
    print()
    print(f"{'case':<34}{'compiled':>12}{'python':>12}{'speedup':>9}")
    for n_sites, d, dmax in [(10, 2, 8), (10, 3, 27), (16, 2, 32)]:
        t_fast, t_ref = bench_env_chain(n_sites, d, dmax)
        label = f"env_chain N={n_sites} d={d} D={dmax}"
        print(f"{label:<34}{t_fast * 1e6:>10.1f}us{t_ref * 1e6:>10.1f}us"
              f"{t_ref / t_fast:>8.1f}x")
    for n in (8, 27, 64):
        t_fast, t_ref = bench_logdet(n)
        label = f"chol_logdet {n}x{n}"
        print(f"{label:<34}{t_fast * 1e6:>10.1f}us{t_ref * 1e6:>10.1f}us"
              f"{t_ref / t_fast:>8.1f}x")
    print()
    for n_sites, d, dmax in [(10, 2, 8), (10, 3, 27)]:
        t = bench_sweep(n_sites, d, dmax)
        print(f"full MH sweep N={n_sites} d={d} D={dmax} "
              f"({kernels.BACKEND} backend): {t * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
