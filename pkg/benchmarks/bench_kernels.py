"""Compare the numba and pure-numpy kernels.

    python3 benchmarks/bench_kernels.py [--samples N] [--evals N]
"""
import argparse
import time

import numpy as np

from chsh_seq import _kernels
from chsh_seq.optimizer import Constraint, SearchSpace
from chsh_seq.observables import pauli
from chsh_seq.sequential import basis_state


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.add_argument("--evals", type=int, default=2_000)
    args = parser.parse_args()

    psi = basis_state(2, 0).amplitudes
    pa = np.stack([pauli("z").proj_plus, pauli("z").proj_minus])
    pb = np.stack([pauli("x").proj_plus, pauli("x").proj_minus])
    u = np.random.default_rng(0).random((args.samples, 3))

    samplers = {"numpy": _kernels.sample_counts_numpy}
    objectives = {"numpy": (_kernels.build_operators_numpy, _kernels.chsh_lambda_max_numpy)}
    if _kernels.HAVE_NUMBA:
        samplers["numba"] = _kernels.sample_counts_numba
        objectives["numba"] = (_kernels.build_operators_numba, _kernels.chsh_lambda_max_numba)
    else:
        print("numba not installed; timing the numpy path only")

    print(f"sampler: {args.samples} trajectories, qubit z/x scenario")
    for name, fn in samplers.items():
        fn(psi, pa, pb, u[:100])  # compile / warm up
        t = best_of(lambda: fn(psi, pa, pb, u))
        print(f"  {name:6s} {t:8.3f} s  {args.samples / t / 1e6:8.2f} M trajectories/s")

    for dim, constraint in ((2, Constraint.FREE), (4, Constraint.FREE), (4, Constraint.PRODUCT_FORM)):
        space = SearchSpace(dim, constraint)
        xs = np.random.default_rng(1).standard_normal((args.evals, space.parameter_count))
        layout = space.layout
        print(f"objective: dim {dim}, {constraint.value}, {args.evals} evaluations")
        for name, (build, lam) in objectives.items():
            lam(build(xs[0], layout, dim))

            def loop():
                for x in xs:
                    lam(build(x, layout, dim))

            t = best_of(loop)
            print(f"  {name:6s} {t:8.3f} s  {t / args.evals * 1e6:8.1f} us/evaluation")


if __name__ == "__main__":
    main()
