"""Pure-Python implementations of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def orbital_splittings(strain, gamma_b, gamma_b_prime):
    s = np.ascontiguousarray(strain, dtype=float)
    if s.ndim != 2 or s.shape[1] != 6:
        raise ValueError("strain array must have shape (n, 6)")
    xx, yy, zz, xy, yz, zx = s.T
    diag = xx * xx + yy * yy + zz * zz - xx * yy - yy * zz - zz * xx
    off = xy * xy + yz * yz + zx * zx
    with np.errstate(invalid="ignore"):
        out = 2.0 * np.sqrt(gamma_b**2 * diag + gamma_b_prime**2 * off)
    out[~np.isfinite(out)] = np.nan
    return out


def weighted_histogram(values, weights, edges):
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape:
        raise ValueError("values and weights differ in length")
    hist, _ = np.histogram(values, bins=np.asarray(edges, dtype=float), weights=weights)
    return hist.astype(float)
