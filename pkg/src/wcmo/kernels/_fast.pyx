# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled element kernels for the assembly inner loops."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def local_stiffness(double[::1] w, double[:, ::1] Gx, double[:, ::1] Gy,
                    double[:, ::1] eps):
    cdef Py_ssize_t nc = eps.shape[0]
    cdef Py_ssize_t nq = w.shape[0]
    cdef Py_ssize_t nb = Gx.shape[1]
    out_arr = np.zeros((nc, nb, nb), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t c, q, i, j
    cdef double wq, gxi, gyi
    for c in range(nc):
        for q in range(nq):
            wq = w[q] * eps[c, q]
            for i in range(nb):
                gxi = wq * Gx[q, i]
                gyi = wq * Gy[q, i]
                for j in range(nb):
                    out[c, i, j] += gxi * Gx[q, j] + gyi * Gy[q, j]
    return out_arr


def local_mass(double[::1] w, double[:, ::1] B, double[::1] areas):
    cdef Py_ssize_t nc = areas.shape[0]
    cdef Py_ssize_t nq = w.shape[0]
    cdef Py_ssize_t nb = B.shape[1]
    ref_arr = np.zeros((nb, nb), dtype=np.float64)
    cdef double[:, ::1] ref = ref_arr
    cdef Py_ssize_t q, i, j, c
    cdef double wbi
    for q in range(nq):
        for i in range(nb):
            wbi = w[q] * B[q, i]
            for j in range(nb):
                ref[i, j] += wbi * B[q, j]
    out_arr = np.empty((nc, nb, nb), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    for c in range(nc):
        for i in range(nb):
            for j in range(nb):
                out[c, i, j] = areas[c] * ref[i, j]
    return out_arr


def local_load(double[::1] w, double[:, ::1] B, double[:, ::1] fvals,
               double[::1] areas):
    cdef Py_ssize_t nc = fvals.shape[0]
    cdef Py_ssize_t nq = w.shape[0]
    cdef Py_ssize_t nb = B.shape[1]
    out_arr = np.zeros((nc, nb), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t c, q, i
    cdef double wf
    for c in range(nc):
        for q in range(nq):
            wf = w[q] * fvals[c, q]
            for i in range(nb):
                out[c, i] += wf * B[q, i]
        for i in range(nb):
            out[c, i] *= areas[c]
    return out_arr
