"""Compiled kernels. Mirrors ``_pycore`` exactly; see ``epsuppress.kernels``."""

import numpy as np

from libc.math cimport exp, fabs


cdef inline int _parity(unsigned long long v) nogil:
    cdef int p = 0
    while v:
        v &= v - 1
        p ^= 1
    return p


def pauli_dense(int n, unsigned long long xmask, unsigned long long zmask,
                int ny, double coeff):
    cdef Py_ssize_t dim = 1 << n
    out = np.zeros((dim, dim), dtype=np.complex128)
    cdef double complex[:, ::1] m = out
    cdef double complex phase = coeff
    cdef int j
    for j in range(ny % 4):
        phase = phase * 1j
    cdef unsigned long long c
    with nogil:
        for c in range(<unsigned long long>dim):
            if _parity(c & zmask):
                m[c ^ xmask, c] = -phase
            else:
                m[c ^ xmask, c] = phase
    return out


cdef inline double _ohmic(double w, double beta, double mu, int k,
                          double omega_c) nogil:
    cdef double a = fabs(w)
    cdef double p = mu
    cdef int j
    if a == 0.0:
        return 0.0
    for j in range(k):
        p *= a
    if w < 0.0:
        # one exp for both the cutoff and the KMS factor
        return p * exp(-a * (1.0 / omega_c + beta))
    return p * exp(-a / omega_c)


def pv_paired_sum(double omega, const double[::1] x, const double[::1] w,
                  double beta, double mu, int k, double omega_c):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double acc = 0.0
    with nogil:
        for i in range(n):
            acc += w[i] * (_ohmic(omega + x[i], beta, mu, k, omega_c)
                           - _ohmic(omega - x[i], beta, mu, k, omega_c)) / x[i]
    return acc
