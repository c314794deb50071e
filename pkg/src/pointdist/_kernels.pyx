# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels; same signatures as ``_kernels_py``.

Integer powers are built by repeated multiplication and the angular modes by
the Chebyshev recurrence, so each point costs one log and one sin/cos pair.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, log
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline double ipow(double x, long e) nogil:
    cdef double out = 1.0
    cdef double base = x
    cdef long m = e if e >= 0 else -e
    while m:
        if m & 1:
            out *= base
        base *= base
        m >>= 1
    return out if e >= 0 else 1.0 / out


def eval_terms(ks, ps, ns, ss, cs, r, theta):
    cdef cnp.int64_t[:] k = np.ascontiguousarray(ks, dtype=np.int64)
    cdef cnp.int64_t[:] p = np.ascontiguousarray(ps, dtype=np.int64)
    cdef cnp.int64_t[:] n = np.ascontiguousarray(ns, dtype=np.int64)
    cdef cnp.int64_t[:] s = np.ascontiguousarray(ss, dtype=np.int64)
    cdef double[:] c = np.ascontiguousarray(cs, dtype=np.float64)
    r_arr = np.ascontiguousarray(r, dtype=np.float64)
    t_arr = np.ascontiguousarray(theta, dtype=np.float64)
    shape = r_arr.shape
    cdef double[:] rv = r_arr.reshape(-1)
    cdef double[:] tv = t_arr.reshape(-1)
    out = np.zeros(rv.shape[0], dtype=np.float64)
    cdef double[:] ov = out
    cdef Py_ssize_t i, j, npts = rv.shape[0], nterms = k.shape[0]
    cdef long m, max_n = 0, max_p = 0
    for j in range(nterms):
        max_n = max(max_n, n[j])
        max_p = max(max_p, p[j])
    cdef double *cn = <double *> malloc((max_n + 1) * sizeof(double))
    cdef double *sn = <double *> malloc((max_n + 1) * sizeof(double))
    cdef double *lp = <double *> malloc((max_p + 1) * sizeof(double))
    cdef double c1, s1, lr, val, ang
    try:
        for i in range(npts):
            c1 = cos(tv[i])
            s1 = sin(tv[i])
            cn[0] = 1.0
            sn[0] = 0.0
            for m in range(1, max_n + 1):
                cn[m] = cn[m - 1] * c1 - sn[m - 1] * s1
                sn[m] = sn[m - 1] * c1 + cn[m - 1] * s1
            lp[0] = 1.0
            if max_p:
                lr = log(rv[i])
                for m in range(1, max_p + 1):
                    lp[m] = lp[m - 1] * lr
            val = 0.0
            for j in range(nterms):
                ang = sn[n[j]] if s[j] else cn[n[j]]
                val += c[j] * ipow(rv[i], k[j]) * lp[p[j]] * ang
            ov[i] = val
    finally:
        free(cn)
        free(sn)
        free(lp)
    return out.reshape(shape)


def eval_poly(exps_a, exps_b, coeffs, x, y):
    cdef cnp.int64_t[:] a = np.ascontiguousarray(exps_a, dtype=np.int64)
    cdef cnp.int64_t[:] b = np.ascontiguousarray(exps_b, dtype=np.int64)
    cdef double[:] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    xb, yb = np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    shape = xb.shape
    cdef double[:] xv = np.ascontiguousarray(xb).reshape(-1)
    cdef double[:] yv = np.ascontiguousarray(yb).reshape(-1)
    out = np.zeros(xv.shape[0], dtype=np.float64)
    cdef double[:] ov = out
    cdef Py_ssize_t i, j, npts = xv.shape[0], nmono = a.shape[0]
    cdef double val
    for i in range(npts):
        val = 0.0
        for j in range(nmono):
            val += c[j] * ipow(xv[i], a[j]) * ipow(yv[i], b[j])
        ov[i] = val
    return out.reshape(shape)


def radial_panel_sums(long a, long p, nodes, weights, values, panel_index, long n_panels):
    cdef double[:] rn = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef double[:] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[:] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.int64_t[:] idx = np.ascontiguousarray(panel_index, dtype=np.int64)
    out = np.zeros(n_panels, dtype=np.float64)
    cdef double[:] ov = out
    cdef Py_ssize_t i, npts = rn.shape[0]
    cdef double lr, lp
    cdef int q
    for i in range(npts):
        lp = 1.0
        if p:
            lr = log(rn[i])
            for q in range(p):
                lp *= lr
        ov[idx[i]] += w[i] * ipow(rn[i], a) * lp * v[i]
    return out
