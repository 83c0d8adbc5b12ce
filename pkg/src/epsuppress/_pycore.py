"""Pure-numpy versions of the kernels in ``_core.pyx``."""

import numpy as np


def _parity(v):
    v = v.copy()
    p = np.zeros_like(v)
    while np.any(v):
        p ^= v & 1
        v >>= 1
    return p


def pauli_dense(n, xmask, zmask, ny, coeff):
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    signs = 1 - 2 * _parity(cols & zmask)
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[cols ^ xmask, cols] = coeff * (1j ** (ny % 4)) * signs
    return out


def _ohmic(w, beta, mu, k, omega_c):
    a = np.abs(w)
    g = mu * a**k * np.exp(-a / omega_c)
    return np.where(w < 0.0, g * np.exp(-beta * a), g)


def pv_paired_sum(omega, x, w, beta, mu, k, omega_c):
    x = np.asarray(x, dtype=float)
    diff = _ohmic(omega + x, beta, mu, k, omega_c) - _ohmic(omega - x, beta, mu, k, omega_c)
    return float(np.dot(w, diff / x))
