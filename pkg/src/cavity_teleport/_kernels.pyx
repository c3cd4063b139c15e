# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled state-vector kernels.

Site ``s`` of an ``n``-site register maps to bit ``n - 1 - s`` of the basis
index, so site 0 is the most significant bit. Every kernel returns a fresh
array; inputs may be read-only.
"""
import numpy as np

BACKEND = "cython"


def apply_1q(const double complex[::1] amps, int n, int site,
             const double complex[:, ::1] u):
    cdef Py_ssize_t dim = amps.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << (n - 1 - site)
    cdef Py_ssize_t i, j
    cdef double complex a0, a1
    cdef double complex u00 = u[0, 0], u01 = u[0, 1]
    cdef double complex u10 = u[1, 0], u11 = u[1, 1]
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(dim):
        if i & stride:
            continue
        j = i | stride
        a0 = amps[i]
        a1 = amps[j]
        o[i] = u00 * a0 + u01 * a1
        o[j] = u10 * a0 + u11 * a1
    return out


def apply_2q(const double complex[::1] amps, int n, int site_a, int site_b,
             const double complex[:, ::1] u):
    cdef Py_ssize_t dim = amps.shape[0]
    cdef Py_ssize_t sa = (<Py_ssize_t>1) << (n - 1 - site_a)
    cdef Py_ssize_t sb = (<Py_ssize_t>1) << (n - 1 - site_b)
    cdef Py_ssize_t i, i01, i10, i11
    cdef double complex a00, a01, a10, a11
    cdef int r
    cdef double complex m[4][4]
    for r in range(4):
        m[r][0] = u[r, 0]
        m[r][1] = u[r, 1]
        m[r][2] = u[r, 2]
        m[r][3] = u[r, 3]
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(dim):
        if (i & sa) or (i & sb):
            continue
        i01 = i | sb
        i10 = i | sa
        i11 = i | sa | sb
        a00 = amps[i]
        a01 = amps[i01]
        a10 = amps[i10]
        a11 = amps[i11]
        o[i] = m[0][0] * a00 + m[0][1] * a01 + m[0][2] * a10 + m[0][3] * a11
        o[i01] = m[1][0] * a00 + m[1][1] * a01 + m[1][2] * a10 + m[1][3] * a11
        o[i10] = m[2][0] * a00 + m[2][1] * a01 + m[2][2] * a10 + m[2][3] * a11
        o[i11] = m[3][0] * a00 + m[3][1] * a01 + m[3][2] * a10 + m[3][3] * a11
    return out


cdef inline Py_ssize_t _local_index(Py_ssize_t i, Py_ssize_t[::1] masks) nogil:
    cdef Py_ssize_t k, idx = 0
    for k in range(masks.shape[0]):
        idx <<= 1
        if i & masks[k]:
            idx |= 1
    return idx


def _masks(int n, sites):
    return np.array([(1 << (n - 1 - s)) for s in sites], dtype=np.intp)


def marginal(const double complex[::1] amps, int n, sites):
    """Born probabilities of every joint outcome on ``sites`` (first site = MSB)."""
    cdef Py_ssize_t[::1] masks = _masks(n, sites)
    cdef Py_ssize_t k = masks.shape[0]
    probs = np.zeros((<Py_ssize_t>1) << k, dtype=np.float64)
    cdef double[::1] p = probs
    cdef Py_ssize_t i
    cdef double complex a
    for i in range(amps.shape[0]):
        a = amps[i]
        p[_local_index(i, masks)] += a.real * a.real + a.imag * a.imag
    return probs


def project(const double complex[::1] amps, int n, sites, Py_ssize_t outcome):
    """Zero every amplitude inconsistent with ``outcome``; returns (vector, norm^2)."""
    cdef Py_ssize_t[::1] masks = _masks(n, sites)
    cdef Py_ssize_t dim = amps.shape[0]
    out = np.zeros(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t i
    cdef double norm2 = 0.0
    cdef double complex a
    for i in range(dim):
        if _local_index(i, masks) == outcome:
            a = amps[i]
            o[i] = a
            norm2 += a.real * a.real + a.imag * a.imag
    return out, norm2


def select(const double complex[::1] amps, int n, sites, Py_ssize_t outcome):
    """Amplitudes consistent with ``outcome`` on ``sites``, those sites removed."""
    cdef Py_ssize_t[::1] masks = _masks(n, sites)
    cdef Py_ssize_t k = masks.shape[0]
    cdef Py_ssize_t dim = amps.shape[0]
    out = np.empty(dim >> k, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t i, j = 0
    for i in range(dim):
        if _local_index(i, masks) == outcome:
            o[j] = amps[i]
            j += 1
    return out
