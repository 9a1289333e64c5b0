# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly kernels.

Same signatures and results as :mod:`spectral_pgo._kernels_py`.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def scatter_laplacian(double[:, ::1] out, const Py_ssize_t[::1] i_idx,
                      const Py_ssize_t[::1] k_idx, const double[::1] weights):
    """Add ``weights[j] * q_j q_j^T`` for every edge into ``out`` in place."""
    cdef Py_ssize_t j, i, k
    cdef double w
    for j in range(i_idx.shape[0]):
        i = i_idx[j]
        k = k_idx[j]
        w = weights[j]
        out[i, i] += w
        out[k, k] += w
        out[i, k] -= w
        out[k, i] -= w


def scatter_blocks(double[:, ::1] out, const Py_ssize_t[::1] i_idx,
                   const Py_ssize_t[::1] k_idx, const double[:, :, ::1] blocks):
    """Add ``E_j kron blocks[j]`` for every edge into ``out`` in place."""
    cdef Py_ssize_t j, a, b, ri, rk
    cdef Py_ssize_t ell = blocks.shape[1]
    cdef double v
    for j in range(i_idx.shape[0]):
        ri = i_idx[j] * ell
        rk = k_idx[j] * ell
        for a in range(ell):
            for b in range(ell):
                v = blocks[j, a, b]
                out[ri + a, ri + b] += v
                out[rk + a, rk + b] += v
                out[ri + a, rk + b] -= v
                out[rk + a, ri + b] -= v


def congruence(const double[:, :, ::1] transforms, const double[:, :, ::1] infos):
    """Return ``transforms[j].T @ infos[j] @ transforms[j]`` stacked over j."""
    cdef Py_ssize_t m = infos.shape[0]
    cdef Py_ssize_t ell = infos.shape[1]
    cdef Py_ssize_t j, a, b, c
    cdef double acc
    result = np.zeros((m, ell, ell), dtype=np.float64)
    tmp = np.empty((ell, ell), dtype=np.float64)
    cdef double[:, :, ::1] res = result
    cdef double[:, ::1] t = tmp
    for j in range(m):
        # t = info @ transform
        for a in range(ell):
            for b in range(ell):
                acc = 0.0
                for c in range(ell):
                    acc += infos[j, a, c] * transforms[j, c, b]
                t[a, b] = acc
        # res = transform.T @ t
        for a in range(ell):
            for b in range(ell):
                acc = 0.0
                for c in range(ell):
                    acc += transforms[j, c, a] * t[c, b]
                res[j, a, b] = acc
    return result
