"""Pure numpy trajectory loop, the fallback backend.

Same contract as the compiled kernel: walk the per-trajectory bit
generators in order, draw K standard normals each, and accumulate
per-batch sums and outer products of the affine output means.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray


def run_batches(
    bit_generators: list,
    A: NDArray[np.float64],
    b: NDArray[np.float64],
    S: NDArray[np.float64],
    g: NDArray[np.float64],
    batch_sizes: NDArray[np.int64],
    keep_outcomes: bool,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64] | None]:
    n = len(bit_generators)
    n_out, n_steps = A.shape
    n_batches = len(batch_sizes)
    if int(np.sum(batch_sizes)) != n:
        raise ValueError("batch sizes must sum to the trajectory count")
    z = np.empty((n, n_steps))
    for i, bg in enumerate(bit_generators):
        z[i] = np.random.Generator(bg).standard_normal(n_steps)
    means = z @ A.T + b
    outcomes = z @ S.T + g if keep_outcomes else None
    batch_sum = np.empty((n_batches, n_out))
    batch_outer = np.empty((n_batches, n_out, n_out))
    start = 0
    for i, size in enumerate(batch_sizes):
        stop = start + int(size)
        chunk = means[start:stop]
        batch_sum[i] = chunk.sum(axis=0)
        batch_outer[i] = chunk.T @ chunk
        start = stop
    return batch_sum, batch_outer, outcomes
