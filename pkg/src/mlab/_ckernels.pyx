# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float64 fiber-sum kernels.

Same contracts as ``mlab._pykernels``. Zero entries of the averaging matrices
are skipped, which is where most of the saving comes from: atoms are small,
so the matrices are block-sparse.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def mixed_square(const double[:, ::1] ma, const double[:, ::1] m,
                 const double[:, ::1] v, const double[:, ::1] w):
    cdef Py_ssize_t n1 = v.shape[0], n2 = v.shape[1], r = m.shape[0]
    cdef Py_ssize_t ni = ma.shape[0]
    cdef Py_ssize_t i, a, b, j, s
    cdef double acc, wt
    c_arr = np.empty((n1, n1, r), dtype=np.float64)
    out_arr = np.zeros((ni, r), dtype=np.float64)
    cdef double[:, :, ::1] c = c_arr
    cdef double[:, ::1] out = out_arr
    for a in range(n1):
        for b in range(n1):
            for j in range(r):
                acc = 0.0
                for s in range(n2):
                    if m[j, s] != 0.0:
                        acc += m[j, s] * v[a, s] * w[b, s]
                c[a, b, j] = acc * acc
    for i in range(ni):
        for a in range(n1):
            if ma[i, a] == 0.0:
                continue
            for b in range(n1):
                if ma[i, b] == 0.0:
                    continue
                wt = ma[i, a] * ma[i, b]
                for j in range(r):
                    out[i, j] += wt * c[a, b, j]
    return out_arr


def quartic_fiber(const double[:, ::1] ma, const double[:, ::1] da,
                  const double[:, ::1] mb_out, const double[:, ::1] mb_in,
                  const double[:, ::1] x, const double[:, ::1] z):
    cdef Py_ssize_t n1 = x.shape[0], n2 = x.shape[1]
    cdef Py_ssize_t i, a, b, s, t, k
    cdef double d, px, pz, wt, acc
    q_arr = np.zeros((n1, n2, n2), dtype=np.float64)
    r_arr = np.zeros((n1, n2), dtype=np.float64)
    cdef double[:, :, ::1] q = q_arr
    cdef double[:, ::1] r = r_arr
    for a in range(n1):
        for s in range(n2):
            for t in range(n2):
                px = 0.0
                pz = 0.0
                for b in range(n1):
                    d = da[a, b]
                    if d != 0.0:
                        px += d * x[b, s] * x[b, t]
                        pz += d * z[b, s] * z[b, t]
                if px == 0.0 or pz == 0.0:
                    continue
                for i in range(n1):
                    if ma[i, a] != 0.0:
                        q[i, s, t] += ma[i, a] * px * pz
    for i in range(n1):
        for k in range(n2):
            acc = 0.0
            for s in range(n2):
                if mb_in[k, s] == 0.0:
                    continue
                for t in range(n2):
                    wt = mb_in[k, t]
                    if wt != 0.0:
                        acc += mb_in[k, s] * wt * q[i, s, t]
            r[i, k] = acc
    return r_arr @ np.asarray(mb_out).T


def alpha_fiber(const double[:, ::1] ma, const double[:, ::1] mb,
                const double[:, ::1] db, const double[:, ::1] x,
                const double[:, ::1] y, const double[:, ::1] z):
    cdef Py_ssize_t n1 = x.shape[0], n2 = x.shape[1]
    cdef Py_ssize_t i, a, b, k, s
    cdef double dy, dxz, wt
    t_arr = np.zeros((n1, n1, n2), dtype=np.float64)
    r_arr = np.zeros((n1, n2), dtype=np.float64)
    cdef double[:, :, ::1] tt = t_arr
    cdef double[:, ::1] r = r_arr
    for a in range(n1):
        for k in range(n2):
            dy = 0.0
            for s in range(n2):
                if db[k, s] != 0.0:
                    dy += db[k, s] * y[a, s]
            if dy == 0.0:
                continue
            for b in range(n1):
                dxz = 0.0
                for s in range(n2):
                    if db[k, s] != 0.0:
                        dxz += db[k, s] * x[b, s] * z[a, s]
                tt[a, b, k] = dy * dxz
    for i in range(n1):
        for a in range(n1):
            if ma[i, a] == 0.0:
                continue
            for b in range(n1):
                if ma[i, b] == 0.0:
                    continue
                wt = ma[i, a] * ma[i, b]
                for k in range(n2):
                    r[i, k] += wt * tt[a, b, k]
    return r_arr @ np.asarray(mb).T
