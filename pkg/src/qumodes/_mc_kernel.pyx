# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory loop.

Draws standard normals straight from each trajectory's PCG64 bit
generator through numpy's C distribution API and accumulates per-batch
sums and outer products of the affine output means in C. Mirrors
_mc_python.run_batches exactly (same streams, same aggregates up to
float summation order).
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal

cnp.import_array()


def run_batches(
    list bit_generators,
    double[:, ::1] A,
    double[::1] b,
    double[:, ::1] S,
    double[::1] g,
    cnp.int64_t[::1] batch_sizes,
    bint keep_outcomes,
):
    cdef Py_ssize_t n = len(bit_generators)
    cdef Py_ssize_t n_out = A.shape[0]
    cdef Py_ssize_t n_steps = A.shape[1]
    cdef Py_ssize_t n_batches = batch_sizes.shape[0]
    cdef Py_ssize_t i, j, k, r, c, bi, stop

    cdef cnp.int64_t total = 0
    for bi in range(n_batches):
        total += batch_sizes[bi]
    if total != <cnp.int64_t> n:
        raise ValueError("batch sizes must sum to the trajectory count")

    batch_sum_arr = np.zeros((n_batches, n_out))
    batch_outer_arr = np.zeros((n_batches, n_out, n_out))
    cdef double[:, ::1] batch_sum = batch_sum_arr
    cdef double[:, :, ::1] batch_outer = batch_outer_arr

    outcomes_arr = np.empty((n, n_steps)) if keep_outcomes else None
    cdef double[:, ::1] outcomes_view
    if keep_outcomes:
        outcomes_view = outcomes_arr

    z_arr = np.empty(n_steps)
    out_arr = np.empty(n_out)
    cdef double[::1] z = z_arr
    cdef double[::1] out = out_arr

    cdef bitgen_t *rng
    cdef double acc
    cdef object capsule

    bi = 0
    stop = batch_sizes[0]
    for i in range(n):
        while i >= stop:
            bi += 1
            stop += batch_sizes[bi]
        capsule = bit_generators[i].capsule
        rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
        for k in range(n_steps):
            z[k] = random_standard_normal(rng)
        for r in range(n_out):
            acc = b[r]
            for k in range(n_steps):
                acc += A[r, k] * z[k]
            out[r] = acc
        for r in range(n_out):
            batch_sum[bi, r] += out[r]
            for c in range(n_out):
                batch_outer[bi, r, c] += out[r] * out[c]
        if keep_outcomes:
            for k in range(n_steps):
                acc = g[k]
                for j in range(k + 1):
                    acc += S[k, j] * z[j]
                outcomes_view[i, k] = acc
    return batch_sum_arr, batch_outer_arr, outcomes_arr
