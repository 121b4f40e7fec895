# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled orbit membership filter; same contract as ``_scan_py.scan``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, uint8_t, int32_t

cnp.import_array()

cdef enum:
    MAX_S = 32


def scan(x0, step, int64_t n_start, int64_t count, binv, cand_u, double eps):
    cdef const uint64_t[::1] x0v = np.ascontiguousarray(x0, dtype=np.uint64)
    cdef const uint64_t[::1] stepv = np.ascontiguousarray(step, dtype=np.uint64)
    cdef const double[:, ::1] bv = np.ascontiguousarray(binv, dtype=np.float64)
    cdef const double[:, ::1] cv = np.ascontiguousarray(cand_u, dtype=np.float64)
    cdef Py_ssize_t s = x0v.shape[0]
    cdef Py_ssize_t ncand = cv.shape[0]
    if s > MAX_S:
        raise ValueError("dimension too large for the compiled kernel")
    status_arr = np.empty(count, dtype=np.uint8)
    which_arr = np.empty(count, dtype=np.int32)
    cdef uint8_t[::1] status = status_arr
    cdef int32_t[::1] which = which_arr
    cdef double x[MAX_S]
    cdef double y[MAX_S]
    cdef double u, acc
    cdef double lo_in = eps, hi_in = 1.0 - eps, lo_out = -eps, hi_out = 1.0 + eps
    cdef Py_ssize_t k, i, j, c
    cdef uint64_t xi, nn
    cdef int n_inside, last_inside, unsure, out, near
    with nogil:
        for k in range(count):
            nn = <uint64_t>(n_start + k)
            for i in range(s):
                xi = x0v[i] + nn * stepv[i]
                x[i] = <double>(xi >> 11) * 1.1102230246251565e-16
            for i in range(s):
                acc = 0.0
                for j in range(s):
                    acc = acc + bv[i, j] * x[j]
                y[i] = acc
            n_inside = 0
            last_inside = -1
            unsure = 0
            for c in range(ncand):
                out = 0
                near = 0
                for i in range(s):
                    u = y[i] + cv[c, i]
                    if u < lo_out or u >= hi_out:
                        out = 1
                        break
                    if u < lo_in or u > hi_in:
                        near = 1
                if out:
                    continue
                if near:
                    unsure = 1
                    break
                n_inside += 1
                last_inside = c
            if unsure or n_inside > 1:
                status[k] = 2
                which[k] = -1
            elif n_inside == 1:
                status[k] = 1
                which[k] = last_inside
            else:
                status[k] = 0
                which[k] = -1
    return status_arr, which_arr
