"""Benchmark: compiled sweep kernel vs the pure-Python fallback.

Runs the same pre-generated random stream through both kernels and reports
sweep throughput. Usage:

    python benchmarks/bench_mc_kernel.py [--slices 10] [--sweeps 20000]
"""

import argparse
import time

import numpy as np

from dimertrap import _mc_fallback
from dimertrap.bath import influence_coefficients
from dimertrap.kernels import BACKEND, backend
from dimertrap.model import BathParams, DimerParams
from dimertrap.pimc import _eta_unit_spin, free_propagator_matrix


def _setup(P, sweeps, seed=0):
    params = DimerParams(E=1.0, V=1.0, Gamma=0.1)
    bath = BathParams(alpha=0.1, omega_c=5.0, T=1.0)
    t_total = 0.1 * P
    kf = free_propagator_matrix(params, t_total / P)
    k0 = free_propagator_matrix(DimerParams(E=1.0, V=1.0, Gamma=0.0), t_total / P)
    eta = _eta_unit_spin(influence_coefficients(bath, t_total, P), P)
    rng = np.random.Generator(np.random.PCG64(seed))
    n_moves = 3 * (P - 1) + 1
    return dict(
        kf_re=np.ascontiguousarray(kf.real), kf_im=np.ascontiguousarray(kf.imag),
        k0_re=np.ascontiguousarray(k0.real), k0_im=np.ascontiguousarray(k0.imag),
        kabs=np.ascontiguousarray(np.abs(kf)),
        eta_re=np.ascontiguousarray(eta.real), eta_im=np.ascontiguousarray(eta.imag),
        moves=rng.integers(0, n_moves, size=sweeps * n_moves, dtype=np.int64),
        unifs=rng.random(sweeps * n_moves),
        bins=np.minimum(np.arange(sweeps, dtype=np.int64) * 32 // sweeps, 31),
    )


def _run(kernel, P, sweeps, data):
    f = np.zeros(P + 1, dtype=np.int8)
    b = np.zeros(P + 1, dtype=np.int8)
    phi = np.zeros(2)
    accum = np.zeros((32, 9))
    t0 = time.perf_counter()
    kernel.run_chunk(f, b, data["kf_re"], data["kf_im"], data["k0_re"],
                     data["k0_im"], data["kabs"], data["eta_re"], data["eta_im"],
                     data["moves"], data["unifs"], phi, accum, data["bins"], P)
    dt = time.perf_counter() - t0
    return dt, accum


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--slices", type=int, default=10)
    ap.add_argument("--sweeps", type=int, default=20_000)
    args = ap.parse_args()

    data = _setup(args.slices, args.sweeps)
    results = {}
    kernels = {"fallback": _mc_fallback}
    if BACKEND == "compiled":
        kernels["compiled"] = backend
    else:
        print("note: compiled kernel unavailable; benchmarking fallback only")

    for name, kernel in kernels.items():
        _run(kernel, args.slices, min(args.sweeps, 500), data)  # warm-up
        dt, accum = _run(kernel, args.slices, args.sweeps, data)
        results[name] = (dt, accum)
        print(f"{name:>9}: {args.sweeps / dt:10.0f} sweeps/s  "
              f"({dt * 1e3:8.1f} ms for {args.sweeps} sweeps, P={args.slices})")

    if len(results) == 2:
        speedup = results["fallback"][0] / results["compiled"][0]
        same = np.array_equal(results["fallback"][1], results["compiled"][1])
        print(f" speedup : {speedup:.1f}x   accumulators bit-identical: {same}")


if __name__ == "__main__":
    main()
