# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled truncated-jet product kernel."""

import numpy as np
cimport numpy as cnp

BACKEND = "cython"


def jet_mul(const double[:, ::1] a, const double[:, ::1] b,
            const cnp.int64_t[::1] ai, const cnp.int64_t[::1] bi,
            const double[::1] coef, const cnp.int64_t[::1] gi, Py_ssize_t ncoef):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t npairs = ai.shape[0]
    cdef Py_ssize_t r, p
    out_arr = np.zeros((n, ncoef), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for r in range(n):
        for p in range(npairs):
            out[r, gi[p]] += coef[p] * a[r, ai[p]] * b[r, bi[p]]
    return out_arr
