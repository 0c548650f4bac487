# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dense affine kernel.

Each output entry is the pairwise sum of ``W[i, 0]*h[0], ..., W[i, n-1]*h[n-1], b[i]``:
adjacent terms are added, an odd trailing term is carried, and the pass repeats.
The numpy fallback in :mod:`reluswap.kernels` uses the same tree, so both paths agree
bit for bit.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def affine(const double[:, ::1] h, const double[:, ::1] w, const double[::1] b):
    cdef Py_ssize_t n_rows = h.shape[0]
    cdef Py_ssize_t n_in = h.shape[1]
    cdef Py_ssize_t n_out = w.shape[0]
    if w.shape[1] != n_in or b.shape[0] != n_out:
        raise ValueError("affine: shape mismatch")
    out_arr = np.empty((n_rows, n_out), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    buf_arr = np.empty(n_in + 1, dtype=np.float64)
    cdef double[::1] buf = buf_arr
    cdef Py_ssize_t r, i, j, m, half, k
    with nogil:
        for r in range(n_rows):
            for i in range(n_out):
                for j in range(n_in):
                    buf[j] = w[i, j] * h[r, j]
                buf[n_in] = b[i]
                m = n_in + 1
                while m > 1:
                    half = m // 2
                    for k in range(half):
                        buf[k] = buf[2 * k] + buf[2 * k + 1]
                    if m % 2 == 1:
                        buf[half] = buf[m - 1]
                        m = half + 1
                    else:
                        m = half
                out[r, i] = buf[0]
    return out_arr
