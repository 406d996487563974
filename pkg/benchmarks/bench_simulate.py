"""Benchmark the trajectory-simulation kernels: numba @njit vs pure numpy.

Simulates the long-horizon inventory chain under one stationary policy
with both backends, checks that they produce bit-identical samples, and
reports steps/second.

Run:  python benchmarks/bench_simulate.py [--samples 200000] [--steps 500]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from varmdp import DeterministicPolicy, paper_long, policy_chain, simulate
from varmdp._kernels import HAS_NUMBA


def run(backend: str, chain, samples: int, steps: int, seed: int):
    start = time.perf_counter()
    ecdf = simulate(chain, samples=samples, seed=seed, n_steps=steps, backend=backend)
    elapsed = time.perf_counter() - start
    return ecdf, elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--steps", type=int, default=500)
    parser.add_argument("--seed", type=int, default=20_240_101)
    args = parser.parse_args()

    chain = policy_chain(paper_long(),
                         DeterministicPolicy.from_stationary({0: 2, 1: 0, 2: 0, 3: 0}))
    total_steps = args.samples * args.steps

    print(f"chain: {chain.n_states} pair states, {args.samples} samples x "
          f"{args.steps} steps")

    ref, t_numpy = run("numpy", chain, args.samples, args.steps, args.seed)
    print(f"numpy : {t_numpy:8.3f} s   {total_steps / t_numpy / 1e6:8.1f} M steps/s")

    if not HAS_NUMBA:
        print("numba : unavailable (not installed)")
        return

    # first call includes JIT compilation; time the second
    run("numba", chain, 1000, args.steps, args.seed)
    out, t_numba = run("numba", chain, args.samples, args.steps, args.seed)
    print(f"numba : {t_numba:8.3f} s   {total_steps / t_numba / 1e6:8.1f} M steps/s "
          f"({t_numpy / t_numba:.1f}x)")

    identical = np.array_equal(ref.samples, out.samples)
    print(f"backends bit-identical: {identical}")
    if not identical:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
