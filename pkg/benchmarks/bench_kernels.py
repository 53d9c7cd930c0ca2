"""Compare the numba kernels against their fallbacks.

Kernels:
1. Hopcroft-Karp matching: jitted kernel vs the same code run as plain Python.
2. One population-dynamics step: jitted sampler vs the vectorized numpy sampler.

Run with ``python3 benchmarks/bench_kernels.py``; requires numba.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from flexmatch import USE_NUMBA
from flexmatch.graphs import sample_graph
from flexmatch.matching import _hopcroft_karp
from flexmatch.model import scenario_model
from flexmatch.rde import PopulationState, RdeLaws, sample_theta


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_matching(n: int, repeats: int) -> None:
    model = scenario_model(0.6, 0.0, 2.5, "one")
    g = sample_graph(model, n, seed=1)
    args = (np.int64(g.n), g.indptr, g.indices)
    _hopcroft_karp(*args)  # compile
    fast = best_of(lambda: _hopcroft_karp(*args), repeats)
    slow = best_of(lambda: _hopcroft_karp.py_func(*args), repeats)
    assert _hopcroft_karp(*args)[0] == _hopcroft_karp.py_func(*args)[0]
    print(f"hopcroft-karp  n={n:>7}  edges={g.edge_count:>7}  numba {fast * 1e3:8.2f} ms  "
          f"python {slow * 1e3:8.2f} ms  speedup {slow / fast:6.1f}x")


def bench_theta(pop_size: int, repeats: int) -> None:
    model = scenario_model(0.6, 1.0, 5.0, "two")
    laws = RdeLaws.build(model)
    rng = np.random.default_rng(0)
    state = PopulationState(rng.uniform(size=(2, pop_size)) * (rng.uniform(size=(2, pop_size)) > 0.2))
    seq = np.random.SeedSequence(7)
    sample_theta(state.pop, laws, 0, 16, False, seq, use_numba=True)  # compile
    fast = best_of(lambda: sample_theta(state.pop, laws, 0, pop_size, False, seq, use_numba=True), repeats)
    slow = best_of(lambda: sample_theta(state.pop, laws, 0, pop_size, False, seq, use_numba=False), repeats)
    a = sample_theta(state.pop, laws, 0, pop_size, False, seq, use_numba=True).mean()
    b = sample_theta(state.pop, laws, 0, pop_size, False, seq, use_numba=False).mean()
    print(f"theta step     pop={pop_size:>7}  numba {fast * 1e3:8.2f} ms  numpy  {slow * 1e3:8.2f} ms  "
          f"speedup {slow / fast:6.1f}x  (means {a:.4f} / {b:.4f})")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if not USE_NUMBA:
        raise SystemExit("numba is disabled (FLEXMATCH_DISABLE_NUMBA set or numba missing)")
    for n in args.sizes:
        bench_matching(n, args.repeats)
    for n in args.sizes:
        bench_theta(n, args.repeats)


if __name__ == "__main__":
    main()
