"""Time the trajectory sampler's python and compiled backends.

Usage::

    python3 benchmarks/bench_trajectories.py [-n N] [--repeats K]

Both backends draw identical random streams, so the comparison is pure
engine overhead. The workload is the five-mode gate circuit at 45
degrees, the heaviest configuration the command-line tools run.

Timings are split into stream setup (spawning one PCG64 generator per
trajectory, identical for both backends) and the sampling kernel
itself, because the setup cost dominates for large ensembles and would
otherwise mask the kernel difference.
"""

import argparse
import math
import time

import numpy as np

from qumodes import ProtocolConfig, measurement_plan, prepare_premeasurement_state
from qumodes import backends
from qumodes.backends import HAS_COMPILED_KERNEL
from qumodes.simulate import derive_trajectory_model, sample_trajectories


def build_model():
    config = ProtocolConfig(theta=math.pi / 4, squeezing_r=0.5180816459236603)
    state = prepare_premeasurement_state(config)
    return derive_trajectory_model(state, measurement_plan(config))


def time_setup(n, repeats):
    best = math.inf
    bitgens = None
    for _ in range(repeats):
        start = time.perf_counter()
        children = np.random.SeedSequence(0).spawn(n)
        bitgens = [np.random.PCG64(c) for c in children]
        best = min(best, time.perf_counter() - start)
    return best, bitgens


def time_kernel(model, bitgens, backend, repeats):
    runner, _ = backends.select_backend(backend)
    args = (
        np.ascontiguousarray(model.A),
        np.ascontiguousarray(model.b),
        np.ascontiguousarray(model.S),
        np.ascontiguousarray(model.g),
        np.array([len(bitgens)], dtype=np.int64),
        False,
    )
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        runner(bitgens, *args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("-n", type=int, default=200_000, help="trajectories per run")
    parser.add_argument("--repeats", type=int, default=3, help="best-of-K timing")
    args = parser.parse_args()

    model = build_model()
    backend_names = ["python"]
    if HAS_COMPILED_KERNEL:
        backend_names.append("compiled")
    else:
        print("compiled kernel not built; timing the python backend only\n")

    setup, bitgens = time_setup(args.n, args.repeats)
    print(f"stream setup (both backends): {setup * 1e3:9.1f} ms")

    kernel_times = {}
    for backend in backend_names:
        seconds = time_kernel(model, bitgens, backend, args.repeats)
        kernel_times[backend] = seconds
        rate = args.n / seconds
        print(f"{backend:>8} sampling kernel:      {seconds * 1e3:9.1f} ms   "
              f"{rate / 1e6:6.2f} M traj/s")

    if len(backend_names) == 2:
        py, ck = kernel_times["python"], kernel_times["compiled"]
        print(f"\nkernel speedup:     {py / ck:5.1f}x")
        print(f"end-to-end speedup: {(setup + py) / (setup + ck):5.1f}x "
              "(stream setup dominates)")
        run_py = sample_trajectories(model, min(args.n, 20_000), 0, backend="python")
        run_ck = sample_trajectories(model, min(args.n, 20_000), 0, backend="compiled")
        mean_diff = np.abs(run_py.mean - run_ck.mean).max()
        cov_diff = np.abs(run_py.cov - run_ck.cov).max()
        print(f"max |mean difference| = {mean_diff:.2e}")
        print(f"max |cov  difference| = {cov_diff:.2e}")


if __name__ == "__main__":
    main()
