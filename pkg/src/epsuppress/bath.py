"""Thermal Ohmic-like bath: decay rates, KMS detailed balance, principal values."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureError
from .kernels import pv_paired_sum


@dataclass(frozen=True, eq=False)
class OhmicBath:
    """Ohmic-like rates ``mu w^k exp(-w/omega_c)`` for ``w > 0``, KMS-extended to ``w < 0``.

    ``coupling`` is the Hermitian PSD matrix ``c`` with
    ``gamma_ab(w) = c_ab * gamma(w)``. ``None`` means independent baths
    (identity, sized to the interaction set). The Gibbs state is stationary
    under the resulting Lindblad generator only for real ``c``; a complex
    Hermitian ``c`` obeys KMS entrywise but not ``gamma_ab(-w) =
    exp(-beta w) gamma_ba(w)``.
    """

    beta: float = 1.0
    mu: float = 1.0
    k: int = 1
    omega_c: float = 10.0
    coupling: np.ndarray | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be an integer >= 1")
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")
        object.__setattr__(self, "k", int(self.k))
        if self.coupling is not None:
            c = np.atleast_2d(np.asarray(self.coupling, dtype=complex))
            if c.shape[0] != c.shape[1]:
                raise ValueError("coupling matrix must be square")
            if np.abs(c - c.conj().T).max() > 1e-12 * max(1.0, np.abs(c).max()):
                raise ValueError("coupling matrix must be Hermitian")
            evals = np.linalg.eigvalsh(c)
            if evals.min(initial=0.0) < -1e-12 * max(abs(np.trace(c).real), 1e-300):
                raise ValueError("coupling matrix must be positive semi-definite")
            object.__setattr__(self, "coupling", c)

    def gamma(self, omega):
        """Scalar rate; accepts floats or arrays."""
        w = np.asarray(omega, dtype=float)
        a = np.abs(w)
        g = self.mu * a**self.k * np.exp(-a / self.omega_c)
        g = np.where(w < 0, np.exp(-self.beta * a) * g, g)
        return float(g) if g.ndim == 0 else g

    def coupling_matrix(self, n_terms: int) -> np.ndarray:
        if self.coupling is None:
            return np.eye(n_terms, dtype=complex)
        if self.coupling.shape[0] != n_terms:
            raise ValueError(
                f"coupling matrix is {self.coupling.shape[0]}x{self.coupling.shape[0]} "
                f"but there are {n_terms} interaction terms"
            )
        return self.coupling

    def gamma_matrix(self, omega: float, n_terms: int) -> np.ndarray:
        return self.coupling_matrix(n_terms) * self.gamma(omega)

    def peak(self) -> tuple[float, float]:
        """Location and value of the maximum of ``gamma`` over ``w > 0``."""
        w = self.k * self.omega_c
        return w, self.mu * w**self.k * np.exp(-self.k)

    def one_sided(self, omega: float, tol: float = 1e-8) -> complex:
        """Scalar factor of ``Gamma(w) = gamma(w)/2 + i S(w)``."""
        return 0.5 * self.gamma(omega) + 1j * s_principal_value(self, omega, tol)

    def _key(self):
        return (self.beta, self.mu, self.k, self.omega_c)


def gamma_scalar(bath: OhmicBath, omega: float) -> float:
    return bath.gamma(float(omega))


def gamma_eigensystem(bath: OhmicBath, omega: float, n_terms: int) -> tuple[np.ndarray, np.ndarray]:
    """``U`` and rates with ``U^dag gamma(w) U = diag(rates)``.

    With factorized coupling ``U`` diagonalizes ``c`` and does not depend on
    ``w``. Round-off negatives are clipped to zero.
    """
    u, evals = coupling_eigensystem(bath, n_terms)
    return u, evals * bath.gamma(float(omega))


def coupling_eigensystem(bath: OhmicBath, n_terms: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors and clipped eigenvalues of the coupling matrix."""
    evals, u = np.linalg.eigh(bath.coupling_matrix(n_terms))
    return u, np.where(evals < 0, 0.0, evals)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _panel_edges(omega: float, cutoff: float, scale: float) -> np.ndarray:
    start = min(1e-3 * scale, cutoff)
    edges = [0.0]
    x = start
    while x < cutoff:
        edges.append(x)
        x *= 2.0
    edges.append(cutoff)
    if 0.0 < abs(omega) < cutoff:
        edges.append(abs(omega))
        # resolve the kink at |w| on both sides
        for f in (0.5, 0.9, 0.99, 1.01, 1.1, 1.5):
            if f * abs(omega) < cutoff:
                edges.append(f * abs(omega))
    return np.unique(np.array(edges))


def _nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    t, wt = _gauss_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (b - a) * t[None, :] + 0.5 * (b + a)
    w = 0.5 * (b - a) * wt[None, :]
    return np.ascontiguousarray(x.ravel()), np.ascontiguousarray(w.ravel())


@lru_cache(maxsize=4096)
def _s_cached(key, omega: float, tol: float) -> float:
    beta, mu, k, omega_c = key
    if mu == 0.0:
        return 0.0
    cutoff = 50.0 * max(omega_c, abs(omega), 1.0 / beta)
    scale = min(omega_c, 1.0 / beta)
    edges = _panel_edges(omega, cutoff, scale)
    peak = mu * (k * omega_c) ** k * np.exp(-k)
    prev = None
    for order in (16, 32, 64, 128, 256):
        x, w = _nodes(edges, order)
        # PV int gamma(w')/(w - w') dw'  =  -int_0^L [gamma(w+x) - gamma(w-x)]/x dx
        val = -pv_paired_sum(float(omega), x, w, beta, mu, k, omega_c) / (2 * np.pi)
        if prev is not None and abs(val - prev) <= tol * max(abs(val), peak):
            return val
        prev = val
    raise QuadratureError(
        f"principal value at omega={omega} did not converge to tol={tol} "
        f"(last change {abs(val - prev):.3g})"
    )


def s_principal_value(bath: OhmicBath, omega: float, tol: float = 1e-8) -> float:
    """``S(w) = (1/2pi) PV int gamma(w') / (w - w') dw'``.

    The integrand is folded symmetrically about the pole, which cancels the
    singularity exactly; the remaining smooth integral over ``[0, L]`` with
    ``L = 50 max(omega_c, |w|, 1/beta)`` uses composite Gauss-Legendre
    panels, doubling the order until successive values agree to ``tol``
    (relative to ``max(|S|, peak gamma)``).
    """
    return _s_cached(bath._key(), float(omega), float(tol))


def one_sided_matrix(bath: OhmicBath, omega: float, n_terms: int, tol: float = 1e-8) -> np.ndarray:
    """``Gamma_ab(w) = c_ab (gamma(w)/2 + i S(w))``."""
    return bath.coupling_matrix(n_terms) * bath.one_sided(omega, tol)
