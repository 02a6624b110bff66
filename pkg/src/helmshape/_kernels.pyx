# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pairwise Hankel kernels (same contract as ``_kernels_py``)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from scipy.special.cython_special cimport j0, j1, y0, y1

cnp.import_array()


def hankel_pairs(targets, sources, double kappa):
    cdef const double[:, ::1] t = np.ascontiguousarray(targets, dtype=np.float64)
    cdef const double[:, ::1] s = np.ascontiguousarray(sources, dtype=np.float64)
    cdef Py_ssize_t M = t.shape[0], N = s.shape[0], i, j
    H0 = np.zeros((M, N), dtype=np.complex128)
    H1r = np.zeros((M, N), dtype=np.complex128)
    cdef double complex[:, ::1] h0 = H0
    cdef double complex[:, ::1] h1 = H1r
    cdef double dx, dy, r, z
    with nogil:
        for i in range(M):
            for j in range(N):
                dx = t[i, 0] - s[j, 0]
                dy = t[i, 1] - s[j, 1]
                r = sqrt(dx * dx + dy * dy)
                if r == 0.0:
                    continue
                z = kappa * r
                h0[i, j] = j0(z) + 1j * y0(z)
                h1[i, j] = (j1(z) + 1j * y1(z)) / r
    return H0, H1r
