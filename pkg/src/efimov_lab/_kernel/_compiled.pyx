# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of ``_pure.integrate_numerov``.

Bit-for-bit the same arithmetic as the pure kernel, in the same order,
so both backends produce identical samples and node counts.
"""

from libc.math cimport log, fabs, isfinite

import numpy as np


def integrate_numerov(w, double h, double g0, double dg0,
                      double renorm_threshold=1e250):
    """See ``efimov_lab._kernel._pure.integrate_numerov``."""
    w_arr = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] wl = w_arr
    cdef Py_ssize_t n = wl.shape[0]
    if n < 2:
        raise ValueError(f"at least 2 grid points required, got {n}")
    if not (h > 0.0 and isfinite(h)):
        raise ValueError(f"step must be positive and finite, got {h!r}")

    g_arr = np.zeros(n, dtype=np.float64)
    ls_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] g = g_arr
    cdef double[::1] ls = ls_arr

    cdef double h2 = h * h
    cdef double c12 = h2 / 12.0

    cdef double gm = g0
    cdef double dw = (wl[1] - wl[0]) / h
    cdef double gi = gm + h * dg0 + 0.5 * h2 * wl[0] * gm \
        + (h2 * h / 6.0) * (wl[0] * dg0 + dw * gm)
    g[0] = gm
    g[1] = gi

    cdef double running_log = 0.0
    cdef long nodes = 0
    cdef int sign_prev = 0
    cdef int s
    if gm != 0.0:
        sign_prev = 1 if gm > 0.0 else -1
    if gi != 0.0:
        s = 1 if gi > 0.0 else -1
        if sign_prev != 0 and s != sign_prev:
            nodes += 1
        sign_prev = s

    cdef double cm = 1.0 - c12 * wl[0]
    cdef double ci = 1.0 - c12 * wl[1]
    cdef double cp, gp, scale
    cdef Py_ssize_t i
    for i in range(1, n - 1):
        cp = 1.0 - c12 * wl[i + 1]
        gp = ((12.0 - 10.0 * ci) * gi - cm * gm) / cp
        if gp > renorm_threshold or gp < -renorm_threshold:
            scale = fabs(gp)
            gi /= scale
            gp /= scale
            running_log += log(scale)
        g[i + 1] = gp
        ls[i + 1] = running_log
        if gp != 0.0:
            s = 1 if gp > 0.0 else -1
            if sign_prev != 0 and s != sign_prev:
                nodes += 1
            sign_prev = s
        gm = gi
        gi = gp
        cm = ci
        ci = cp

    return g_arr, ls_arr, int(nodes)
