# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-cell kernels for strain-map processing."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, isfinite

cnp.import_array()


def orbital_splittings(const double[:, ::1] strain, double gamma_b, double gamma_b_prime):
    """Orbital splitting (J) per row of an (n, 6) strain array.

    Columns are Sxx, Syy, Szz, Sxy, Syz, Szx; deformation potentials in J.
    Rows with non-finite entries yield NaN.
    """
    cdef Py_ssize_t n = strain.shape[0], i
    cdef double xx, yy, zz, xy, yz, zx, diag, off
    cdef double g2 = gamma_b * gamma_b, gp2 = gamma_b_prime * gamma_b_prime
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    if strain.shape[1] != 6:
        raise ValueError("strain array must have shape (n, 6)")
    with nogil:
        for i in range(n):
            xx = strain[i, 0]
            yy = strain[i, 1]
            zz = strain[i, 2]
            xy = strain[i, 3]
            yz = strain[i, 4]
            zx = strain[i, 5]
            diag = xx * xx + yy * yy + zz * zz - xx * yy - yy * zz - zz * xx
            off = xy * xy + yz * yz + zx * zx
            res[i] = 2.0 * sqrt(g2 * diag + gp2 * off)
            if not isfinite(res[i]):
                res[i] = 0.0 / 0.0
    return out


def weighted_histogram(const double[::1] values, const double[::1] weights,
                       const double[::1] edges):
    """Sum of weights per bin; the last bin is closed on the right.

    Values outside [edges[0], edges[-1]] are dropped; callers widen the edges
    first when they need conservation.
    """
    cdef Py_ssize_t n = values.shape[0], nb = edges.shape[0] - 1, i, lo, hi, mid
    cdef double v
    out = np.zeros(nb, dtype=np.float64)
    cdef double[::1] acc = out
    if weights.shape[0] != n:
        raise ValueError("values and weights differ in length")
    with nogil:
        for i in range(n):
            v = values[i]
            if not (v >= edges[0] and v <= edges[nb]):
                continue
            lo = 0
            hi = nb
            while hi - lo > 1:
                mid = (lo + hi) >> 1
                if v >= edges[mid]:
                    lo = mid
                else:
                    hi = mid
            acc[lo] += weights[i]
    return out
