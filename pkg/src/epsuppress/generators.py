"""Frequency-resolved couplings and the Lindblad / DSAME Liouvillians."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bath import OhmicBath
from .errors import AmbiguousGroupingError
from .operators import (
    PauliString,
    SpectralDecomposition,
    is_hermitian,
    pauli_matrix,
    qubit_support,
    spectral_decompose,
)

MATERIALIZE_MAX_DIM = 32


@dataclass(frozen=True, eq=False)
class InteractionSet:
    """Hermitian system operators ``A_a`` of ``H_SB = sum_a A_a (x) B_a``."""

    operators: tuple[np.ndarray, ...]
    labels: tuple[str, ...]
    k_locality: int | None = None

    def __post_init__(self):
        ops = tuple(np.asarray(a, dtype=complex) for a in self.operators)
        if len(ops) != len(self.labels):
            raise ValueError("operators and labels differ in length")
        dims = {a.shape for a in ops}
        if len(dims) > 1:
            raise ValueError(f"interaction operators have mixed shapes {dims}")
        for a, lab in zip(ops, self.labels):
            if not is_hermitian(a):
                raise ValueError(f"interaction operator {lab} is not Hermitian")
            if self.k_locality is not None and len(qubit_support(a)) > self.k_locality:
                raise ValueError(f"interaction operator {lab} is not {self.k_locality}-local")
        object.__setattr__(self, "operators", ops)

    @classmethod
    def from_paulis(cls, paulis: Sequence[PauliString | str], k_locality: int | None = None):
        ps = [PauliString.parse(p) if isinstance(p, str) else p for p in paulis]
        return cls(tuple(pauli_matrix(p) for p in ps), tuple(str(p) for p in ps), k_locality)

    @classmethod
    def all_weight_one(cls, n: int):
        ps = [PauliString.single(n, q, c) for q in range(n) for c in "XYZ"]
        return cls.from_paulis(ps, k_locality=1)

    @classmethod
    def empty(cls):
        return cls((), ())

    def __len__(self):
        return len(self.operators)

    @property
    def dim(self) -> int | None:
        return self.operators[0].shape[0] if self.operators else None

    def embed(self, n_before: int, n_after: int) -> "InteractionSet":
        """Same couplings acting on a block inside a larger register."""
        left, right = np.eye(1 << n_before), np.eye(1 << n_after)
        ops = tuple(np.kron(np.kron(left, a), right) for a in self.operators)
        return InteractionSet(ops, self.labels, self.k_locality)

    def __add__(self, other: "InteractionSet") -> "InteractionSet":
        k = None
        if self.k_locality is not None and other.k_locality is not None:
            k = max(self.k_locality, other.k_locality)
        return InteractionSet(self.operators + other.operators, self.labels + other.labels, k)


@dataclass(frozen=True, eq=False)
class FrequencyComponents:
    """``A(w) = sum_{e_l' - e_l = w} P_l A P_l'`` for each binned Bohr frequency."""

    frequencies: np.ndarray
    components: tuple[np.ndarray, ...]
    frequency_tol: float

    def as_dict(self) -> dict[float, np.ndarray]:
        return dict(zip(self.frequencies.tolist(), self.components))

    def total(self) -> np.ndarray:
        return sum(self.components)

    def __len__(self):
        return len(self.frequencies)


def bohr_bins(decomp: SpectralDecomposition, frequency_tol: float | None = None):
    """Bin all Bohr frequencies ``e_l' - e_l``.

    Returns ``(centers, labels, tol)`` where ``labels[l, l']`` indexes
    ``centers``. Distinct frequencies closer than ``tol`` but farther apart
    than eigenvalue noise raise :class:`AmbiguousGroupingError`.
    """
    e = decomp.energies
    span = e[-1] - e[0] if len(e) > 1 else 0.0
    if frequency_tol is None:
        frequency_tol = max(1e-9 * span, 1e-14)
    noise = 1e-12 * max(1.0, np.abs(e).max())
    w = (e[None, :] - e[:, None]).ravel()
    order = np.argsort(w, kind="stable")
    ws = w[order]
    labels = np.empty(len(w), dtype=int)
    centers = []
    start = 0
    for i in range(1, len(ws) + 1):
        if i == len(ws) or ws[i] - ws[i - 1] > frequency_tol:
            cluster = ws[start:i]
            if cluster[-1] - cluster[0] > noise:
                raise AmbiguousGroupingError(
                    f"Bohr frequencies {cluster[0]:.12g} and {cluster[-1]:.12g} are closer "
                    f"than frequency_tol={frequency_tol:.3g} but not degenerate"
                )
            labels[order[start:i]] = len(centers)
            centers.append(float(np.mean(cluster)))
            start = i
    centers = np.array(centers)
    # exact antisymmetry so that A(w)^dag and A(-w) share a key
    centers = 0.5 * (centers - centers[::-1])
    n = len(e)
    return centers, labels.reshape(n, n), frequency_tol


def decompose_interaction(
    a: np.ndarray,
    decomp: SpectralDecomposition,
    frequency_tol: float | None = None,
    _bins=None,
) -> FrequencyComponents:
    """Split ``a`` into Bohr-frequency components of the decomposed Hamiltonian."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (decomp.dim, decomp.dim):
        raise ValueError(f"operator shape {a.shape} does not match dimension {decomp.dim}")
    centers, labels, tol = _bins if _bins is not None else bohr_bins(decomp, frequency_tol)
    projs = decomp.projectors
    acc: dict[int, np.ndarray] = {}
    floor = 1e-14 * max(1.0, np.abs(a).max(initial=0.0))
    for l, pl in enumerate(projs):
        left = pl @ a
        for lp, plp in enumerate(projs):
            block = left @ plp
            if np.abs(block).max(initial=0.0) <= floor:
                continue
            b = labels[l, lp]
            acc[b] = acc[b] + block if b in acc else block
    keys = sorted(acc)
    return FrequencyComponents(centers[keys], tuple(acc[k] for k in keys), tol)


class Liouvillian:
    """Linear map ``rho -> K_L rho + rho K_R + sum_j L_j rho R_j``.

    ``hamiltonian`` is the system Hamiltonian that defines the Bohr
    frequencies; ``lamb_shift`` is zero unless requested.
    """

    def __init__(self, kind, hamiltonian, lamb_shift, left, right, sandwiches):
        self.kind = kind
        self.hamiltonian = hamiltonian
        self.lamb_shift = lamb_shift
        self.left = left
        self.right = right
        self.sandwiches = list(sandwiches)
        self._matrix = None

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        if self._matrix is not None:
            d = self.dim
            return (self._matrix @ rho.reshape(d * d)).reshape(d, d)
        out = self.left @ rho + rho @ self.right
        for l, r in self.sandwiches:
            out += l @ rho @ r
        return out

    __call__ = apply

    def dissipator(self, rho: np.ndarray) -> np.ndarray:
        """Non-unitary part only: removes ``-i[H + H_LS, rho]``."""
        h = self.hamiltonian + self.lamb_shift
        return self.apply(rho) + 1j * (h @ rho - rho @ h)

    def matrix(self) -> np.ndarray:
        """Row-major superoperator: ``vec(L rho R) = (L kron R^T) vec(rho)``."""
        if self._matrix is None:
            d = self.dim
            eye = np.eye(d)
            m = np.kron(self.left, eye) + np.kron(eye, self.right.T)
            for l, r in self.sandwiches:
                m += np.kron(l, r.T)
            self._matrix = m
        return self._matrix

    def norm_bound(self) -> float:
        """Cheap upper bound on the induced Frobenius norm."""
        nrm = lambda x: np.linalg.norm(x, 2)
        return nrm(self.left) + nrm(self.right) + sum(nrm(l) * nrm(r) for l, r in self.sandwiches)

    def materialize(self) -> "Liouvillian":
        if self.dim <= MATERIALIZE_MAX_DIM:
            self.matrix()
        return self


def _components(h, interactions, grouping_tol, frequency_tol):
    decomp = spectral_decompose(h, grouping_tol)
    bins = bohr_bins(decomp, frequency_tol)
    comps = [decompose_interaction(a, decomp, _bins=bins) for a in interactions.operators]
    return decomp, comps


def _validate(h, interactions):
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("Hamiltonian must be Hermitian")
    if len(interactions) and interactions.dim != h.shape[0]:
        raise ValueError("interaction operators and Hamiltonian differ in dimension")
    return h


def build_lindblad(
    h: np.ndarray,
    interactions: InteractionSet,
    bath: OhmicBath,
    include_lamb_shift: bool = False,
    grouping_tol: float | None = None,
    frequency_tol: float | None = None,
    pv_tol: float = 1e-8,
) -> Liouvillian:
    """``-i[H + H_LS, .] + D`` with the RWA (Davies) dissipator.

    ``D[rho] = sum_w sum_ab gamma_ab(w) (A_b(w) rho A_a(w)^dag
    - 1/2 {A_a(w)^dag A_b(w), rho})`` evaluated literally over the coupling
    matrix, and ``H_LS = sum_w sum_ab S_ab(w) A_a(w)^dag A_b(w)``.
    """
    h = _validate(h, interactions)
    d = h.shape[0]
    n_terms = len(interactions)
    lamb = np.zeros((d, d), dtype=complex)
    g_sum = np.zeros((d, d), dtype=complex)
    sandwiches = []
    if n_terms:
        c = bath.coupling_matrix(n_terms)
        _, comps = _components(h, interactions, grouping_tol, frequency_tol)
        by_freq: dict[float, list] = {}
        for b, fc in enumerate(comps):
            for w, op in fc.as_dict().items():
                by_freq.setdefault(w, [None] * n_terms)[b] = op
        for w in sorted(by_freq):
            ops = by_freq[w]
            rate = bath.gamma(w)
            s = bath.one_sided(w, pv_tol).imag if include_lamb_shift else 0.0
            for b in range(n_terms):
                if ops[b] is None:
                    continue
                # B_b = sum_a conj(c_ab) A_a(w), so B_b^dag = sum_a c_ab A_a(w)^dag
                terms = [np.conj(c[a_, b]) * ops[a_] for a_ in range(n_terms)
                         if ops[a_] is not None and c[a_, b] != 0]
                if not terms:
                    continue
                bb = sum(terms)
                pair = bb.conj().T @ ops[b]
                g_sum += rate * pair
                lamb += s * pair
                if rate != 0.0:
                    sandwiches.append((rate * ops[b], bb.conj().T))
    lamb = 0.5 * (lamb + lamb.conj().T)
    heff = h + lamb
    return Liouvillian(
        "lindblad", h, lamb, -1j * heff - 0.5 * g_sum, 1j * heff - 0.5 * g_sum.conj().T, sandwiches
    )


def build_dsame(
    h: np.ndarray,
    interactions: InteractionSet,
    bath: OhmicBath,
    secular: bool = False,
    zero_principal_value: bool = False,
    grouping_tol: float | None = None,
    frequency_tol: float | None = None,
    pv_tol: float = 1e-8,
) -> Liouvillian:
    """``-i[H, .] + D~`` without the rotating-wave approximation.

    ``D~[rho] = sum_ab sum_ll' Gamma_ab(w_ll') [P_l A_b P_l' rho, A_a] + h.c.``
    where the Hermitian conjugate is taken with ``rho`` treated as Hermitian,
    which keeps the map linear. ``secular=True`` keeps only terms whose two
    Bohr frequencies coincide, reproducing the Lindblad generator with Lamb
    shift. ``zero_principal_value=True`` sets ``S = 0`` (test mode).
    """
    h = _validate(h, interactions)
    d = h.shape[0]
    n_terms = len(interactions)
    left = -1j * h
    right = 1j * h.copy()
    sandwiches = []
    if n_terms:
        c = bath.coupling_matrix(n_terms)
        _, comps = _components(h, interactions, grouping_tol, frequency_tol)
        freqs = sorted({w for fc in comps for w in fc.frequencies.tolist()})

        def gam(w):
            if zero_principal_value:
                return 0.5 * bath.gamma(w)
            return bath.one_sided(w, pv_tol)

        big_gamma = {w: gam(w) for w in freqs}
        if secular:
            ops_w = {w: [fc.as_dict().get(w) for fc in comps] for w in freqs}
            for w in freqs:
                ops = ops_w[w]
                g = big_gamma[w]
                for b in range(n_terms):
                    if ops[b] is None:
                        continue
                    terms = [np.conj(c[a_, b]) * ops[a_] for a_ in range(n_terms)
                             if ops[a_] is not None and c[a_, b] != 0]
                    if not terms:
                        continue
                    bb = sum(terms)
                    bd = bb.conj().T
                    # Gamma [A_b(w) rho, B_b^dag] + h.c.
                    sandwiches.append((g * ops[b], bd))
                    left -= g * bd @ ops[b]
                    sandwiches.append((np.conj(g) * bb, ops[b].conj().T))
                    right -= np.conj(g) * ops[b].conj().T @ bb
        else:
            a_ops = interactions.operators
            for b, fc in enumerate(comps):
                m_b = sum(big_gamma[w] * op for w, op in fc.as_dict().items())
                c_b = sum(c[a_, b] * a_ops[a_] for a_ in range(n_terms) if c[a_, b] != 0)
                if isinstance(m_b, int) or isinstance(c_b, int):
                    continue
                # [M_b rho, C_b] + h.c. with C_b = sum_a c_ab A_a
                sandwiches.append((m_b, c_b))
                left = left - c_b @ m_b
                sandwiches.append((c_b.conj().T, m_b.conj().T))
                right = right - m_b.conj().T @ c_b.conj().T
    return Liouvillian(
        "dsame", h, np.zeros((d, d), dtype=complex), left, right, sandwiches
    )


def rate_from_generator(gen: Liouvillian, rho0: np.ndarray, projector: np.ndarray) -> float:
    """``Tr[P L(rho0)]``."""
    return float(np.real(np.trace(projector @ gen.apply(rho0))))
