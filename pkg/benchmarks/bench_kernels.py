"""Compare the numba kernels with their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run once to trigger compilation, then timed as the best of
--repeat runs. Outputs of both backends are checked for agreement.
"""

import argparse
import time

import numpy as np

from quditlab import correlations, nonlocality
from quditlab.circuit import triangular_phases_batch
from quditlab.core import haar_state
from quditlab.config import jit_enabled


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def poisson_case(use_jit):
    table = nonlocality.ideal_table(8)
    return lambda: correlations.sample_counts(table, 10**5, seed=1, use_jit=use_jit).counts


def bootstrap_case(use_jit):
    table = correlations.sample_counts(nonlocality.ideal_table(4), 10**4, seed=2)
    W = nonlocality.satwap_weights(4)
    return lambda: correlations.bootstrap_errors(table, lambda t: nonlocality.evaluate(W, t), 200, 0, use_jit)


def compile_case(use_jit):
    rng = np.random.default_rng(3)
    states = np.array([haar_state(16, rng).amplitudes for _ in range(2000)])
    return lambda: np.array([s.mzi_phases for s in triangular_phases_batch(states, use_jit=use_jit)])


def lhv_case(use_jit):
    W = nonlocality.satwap_weights(7)
    return lambda: nonlocality.lhv_bound(W, use_jit=use_jit)


CASES = {
    "poisson sampling (d=8, 1e5 shots)": poisson_case,
    "bootstrap (d=4, 200 resamples)": bootstrap_case,
    "mesh compile (2000 states, d=16)": compile_case,
    "LHV enumeration (d=7)": lhv_case,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not jit_enabled():
        print("numba unavailable or disabled; timing the numpy path only")
    print(f"{'kernel':<38}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}  agree")
    for name, case in CASES.items():
        t_np = best_of(case(False), args.repeat)
        if jit_enabled():
            t_jit = best_of(case(True), args.repeat)
            agree = np.allclose(case(False)(), case(True)(), rtol=0, atol=1e-10)
            print(f"{name:<38}{t_np:12.4f}{t_jit:12.4f}{t_np / t_jit:10.1f}  {agree}")
        else:
            print(f"{name:<38}{t_np:12.4f}{'-':>12}{'-':>10}  -")


if __name__ == "__main__":
    main()
