# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled O(n^2) kernels; same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, log1p, expm1, sqrt, fabs, INFINITY

cnp.import_array()


cdef inline void _cellw(double a, double h, double e, double* wn, double* wf) noexcept nogil:
    cdef double c0 = 1.0 - e
    cdef double c1 = 2.0 - e
    cdef double r, m0, m1
    if a > 0.0:
        r = log1p(h / a)
        if c0 == 0.0:
            m0 = r
        else:
            m0 = pow(a, c0) * expm1(c0 * r) / c0
        if c1 == 0.0:
            m1 = r
        else:
            m1 = pow(a, c1) * expm1(c1 * r) / c1
        wf[0] = (m1 - a * m0) / h
        wn[0] = m0 - wf[0]
    else:
        m1 = pow(h, c1) / c1
        wf[0] = m1 / h
        if c0 > 0.0:
            wn[0] = pow(h, c0) / c0 - wf[0]
        else:
            wn[0] = 0.0


cdef inline double _dist(const double[:, ::1] F, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t c
    cdef double s = 0.0, x
    for c in range(F.shape[1]):
        x = F[i, c] - F[j, c]
        s += x * x
    return sqrt(s)


def left_signed(t_in, F_in, double e, bint diff):
    cdef const double[::1] t = np.ascontiguousarray(t_in, dtype=np.float64)
    cdef const double[:, ::1] F = np.ascontiguousarray(F_in, dtype=np.float64)
    cdef Py_ssize_t n1 = t.shape[0], d = F.shape[1]
    if not diff and e >= 1.0:
        raise ValueError("value integrals need an integrable kernel (e < 1)")
    out_arr = np.zeros((n1, d))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, j, c
    cdef double wn, wf
    with nogil:
        for k in range(1, n1):
            for j in range(k):
                _cellw(t[k] - t[j + 1], t[j + 1] - t[j], e, &wn, &wf)
                for c in range(d):
                    if diff:
                        out[k, c] += wn * (F[k, c] - F[j + 1, c]) + wf * (F[k, c] - F[j, c])
                    else:
                        out[k, c] += wn * F[j + 1, c] + wf * F[j, c]
    return out_arr


def left_abs(t_in, F_in, double e, double delta):
    cdef const double[::1] t = np.ascontiguousarray(t_in, dtype=np.float64)
    cdef const double[:, ::1] F = np.ascontiguousarray(F_in, dtype=np.float64)
    cdef Py_ssize_t n1 = t.shape[0]
    out_arr = np.zeros(n1)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k, j
    cdef double wn, wf, vn, vf, acc
    cdef double e_eff = e if delta == 1.0 else e - delta
    with nogil:
        for k in range(1, n1):
            acc = 0.0
            for j in range(k):
                _cellw(t[k] - t[j + 1], t[j + 1] - t[j], e_eff, &wn, &wf)
                vf = _dist(F, k, j)
                if delta == 1.0:
                    vn = _dist(F, k, j + 1)
                else:
                    vf = pow(vf, delta) / pow(t[k] - t[j], delta)
                    if j + 1 == k:
                        vn = vf
                        if e_eff >= 1.0 and vn > 0.0:
                            acc = INFINITY
                    else:
                        vn = pow(_dist(F, k, j + 1), delta) / pow(t[k] - t[j + 1], delta)
                acc += wn * vn + wf * vf
            out[k] = acc
    return out_arr


def pair_hoelder(t_in, F_in, double mu):
    cdef const double[::1] t = np.ascontiguousarray(t_in, dtype=np.float64)
    cdef const double[:, ::1] F = np.ascontiguousarray(F_in, dtype=np.float64)
    cdef Py_ssize_t n1 = t.shape[0], i, k
    cdef double best = 0.0, v
    with nogil:
        for i in range(n1 - 1):
            for k in range(i + 1, n1):
                v = _dist(F, k, i) / pow(t[k] - t[i], mu)
                if v > best:
                    best = v
    return best


def pair_owm(t_in, F_in, double alpha):
    cdef const double[::1] t = np.ascontiguousarray(t_in, dtype=np.float64)
    cdef const double[:, ::1] F = np.ascontiguousarray(F_in, dtype=np.float64)
    cdef Py_ssize_t n1 = t.shape[0], i, j
    cdef double e = 2.0 - alpha
    cdef double best = 0.0, cum, wn, wf, dn, df, v
    with nogil:
        for i in range(n1 - 1):
            cum = 0.0
            dn = 0.0
            for j in range(i, n1 - 1):
                _cellw(t[j] - t[i], t[j + 1] - t[j], e, &wn, &wf)
                df = _dist(F, j + 1, i)
                cum += wn * dn + wf * df
                v = df / pow(t[j + 1] - t[i], 1.0 - alpha) + cum
                if v > best:
                    best = v
                dn = df
    return best


def pair_lambda(t_in, F_in, double alpha):
    cdef const double[::1] t = np.ascontiguousarray(t_in, dtype=np.float64)
    cdef const double[:, ::1] F = np.ascontiguousarray(F_in, dtype=np.float64)
    cdef Py_ssize_t n1 = t.shape[0], d = F.shape[1], i, j, c
    cdef double e = 2.0 - alpha
    cdef double best = 0.0, wn, wf, s, x, scale
    cum_arr = np.zeros(d)
    cdef double[::1] cum = cum_arr
    with nogil:
        for i in range(n1 - 1):
            for c in range(d):
                cum[c] = 0.0
            for j in range(i, n1 - 1):
                _cellw(t[j] - t[i], t[j + 1] - t[j], e, &wn, &wf)
                scale = pow(t[j + 1] - t[i], 1.0 - alpha)
                s = 0.0
                for c in range(d):
                    cum[c] += wn * (F[i, c] - F[j, c]) + wf * (F[i, c] - F[j + 1, c])
                    x = (F[i, c] - F[j + 1, c]) / scale + (1.0 - alpha) * cum[c]
                    s += x * x
                s = sqrt(s)
                if s > best:
                    best = s
    return best
