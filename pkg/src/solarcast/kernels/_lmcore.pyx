# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled MLP forward/Jacobian kernels.

Same contract and parameter layout as _lmcore_py; fills the Jacobian row
per sample without materialising the (N, H, In) intermediate the numpy
fallback needs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport tanh

cnp.import_array()

BACKEND = "cython"


def mlp_forward(w1, b1, w2, b2, x):
    cdef double[:, ::1] w1v = np.ascontiguousarray(w1, dtype=np.float64)
    cdef double[::1] b1v = np.ascontiguousarray(b1, dtype=np.float64)
    cdef double[::1] w2v = np.ascontiguousarray(w2, dtype=np.float64)
    cdef double b2v = b2
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], n_in = xv.shape[1], h = w1v.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] yv = out
    cdef Py_ssize_t k, i, j
    cdef double z, acc
    with nogil:
        for k in range(n):
            acc = b2v
            for i in range(h):
                z = b1v[i]
                for j in range(n_in):
                    z += w1v[i, j] * xv[k, j]
                acc += w2v[i] * tanh(z)
            yv[k] = acc
    return out


def mlp_forward_jacobian(w1, b1, w2, b2, x):
    cdef double[:, ::1] w1v = np.ascontiguousarray(w1, dtype=np.float64)
    cdef double[::1] b1v = np.ascontiguousarray(b1, dtype=np.float64)
    cdef double[::1] w2v = np.ascontiguousarray(w2, dtype=np.float64)
    cdef double b2v = b2
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], n_in = xv.shape[1], h = w1v.shape[0]
    cdef Py_ssize_t p = h * n_in + 2 * h + 1
    y = np.empty(n, dtype=np.float64)
    jac = np.empty((n, p), dtype=np.float64)
    cdef double[::1] yv = y
    cdef double[:, ::1] jv = jac
    cdef Py_ssize_t k, i, j
    cdef double z, acc, t, gate
    with nogil:
        for k in range(n):
            acc = b2v
            for i in range(h):
                z = b1v[i]
                for j in range(n_in):
                    z += w1v[i, j] * xv[k, j]
                t = tanh(z)
                acc += w2v[i] * t
                gate = (1.0 - t * t) * w2v[i]
                for j in range(n_in):
                    jv[k, i * n_in + j] = gate * xv[k, j]
                jv[k, h * n_in + i] = gate
                jv[k, h * n_in + h + i] = t
            jv[k, p - 1] = 1.0
            yv[k] = acc
    return y, jac
