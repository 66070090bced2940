# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernels. Same contract as ``_numpy``; loops release the
GIL so ensemble scoring scales across threads."""
from libc.math cimport lgamma, log, fabs

import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "accel"


def log_binomial_array(total, n):
    """ln C(total, n) elementwise via the log-gamma function."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nf = \
        np.ascontiguousarray(n, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nf.shape[0])
    cdef double t = <double> total
    cdef double lg_t1 = lgamma(t + 1.0)
    cdef Py_ssize_t i, m = nf.shape[0]
    cdef double[::1] nv = nf
    cdef double[::1] ov = out
    with nogil:
        for i in range(m):
            ov[i] = lg_t1 - lgamma(nv[i] + 1.0) - lgamma(t - nv[i] + 1.0)
    return out


def score_deviations(total_dev, count, devs):
    """Anomaly scores for integer deviations under an (S=total_dev, W=count)
    model, plus the guard-band mask settled exactly by the caller."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] dv = \
        np.ascontiguousarray(devs, dtype=np.int64)
    cdef Py_ssize_t m = dv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scores = np.empty(m)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] suspect = np.zeros(m, dtype=np.uint8)
    cdef double S = <double> total_dev
    cdef long long S_int = <long long> total_dev
    cdef double log_w = log(<double> count)
    cdef double lg_s1 = lgamma(S + 1.0)
    cdef double nf, ln_c, lead, g, guard
    cdef long long n
    cdef Py_ssize_t i
    cdef long long[::1] dvv = dv
    cdef double[::1] sv = scores
    cdef cnp.uint8_t[::1] uv = suspect
    with nogil:
        for i in range(m):
            n = dvv[i]
            nf = <double> n
            lead = (nf - 1.0) * log_w
            if n <= S_int:
                ln_c = lg_s1 - lgamma(nf + 1.0) - lgamma(S - nf + 1.0)
                g = ln_c - lead
                sv[i] = -g / S
                guard = 1e-9 * (1.0 + fabs(ln_c) + fabs(lead))
                if n >= 2 and fabs(g) <= guard:
                    uv[i] = 1
            else:
                sv[i] = lead / S
    return scores, suspect.view(np.bool_)


def l1_deviations(x_int, medians):
    """Per-row L1 distance of an integer matrix to the column medians."""
    cdef cnp.ndarray[cnp.int64_t, ndim=2] x = \
        np.ascontiguousarray(x_int, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] med = \
        np.ascontiguousarray(medians, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0], f = x.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t i, j
    cdef long long acc, d
    cdef long long[:, ::1] xv = x
    cdef long long[::1] mv = med
    cdef long long[::1] ov = out
    with nogil:
        for i in range(n):
            acc = 0
            for j in range(f):
                d = xv[i, j] - mv[j]
                acc += d if d >= 0 else -d
            ov[i] = acc
    return out
