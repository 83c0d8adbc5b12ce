"""Pauli strings, dense operator helpers and grouped spectral decomposition."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import AmbiguousGroupingError
from .kernels import pauli_dense

PAULI_LETTERS = "IXYZ"

SINGLE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# a*b = phase * letter
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


@dataclass(frozen=True)
class PauliString:
    """Real-weighted tensor product of single-qubit Paulis.

    Qubit 0 is the leftmost letter and the most significant bit of the
    computational basis index.
    """

    letters: str
    coefficient: float = 1.0

    def __post_init__(self):
        if not self.letters:
            raise ValueError("PauliString needs at least one qubit")
        bad = set(self.letters) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")
        coeff = complex(self.coefficient)
        if coeff.imag != 0:
            raise ValueError("PauliString coefficient must be real")
        object.__setattr__(self, "coefficient", float(coeff.real))

    @classmethod
    def parse(cls, label: str) -> "PauliString":
        """Parse ``"XXII"``, ``"-ZZ"`` or ``"+Y"``."""
        label = label.strip()
        sign = 1.0
        if label[:1] in "+-":
            sign = -1.0 if label[0] == "-" else 1.0
            label = label[1:]
        return cls(label.upper(), sign)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, coefficient: float = 1.0) -> "PauliString":
        letters = ["I"] * n
        letters[qubit] = letter
        return cls("".join(letters), coefficient)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    def masks(self) -> tuple[int, int, int]:
        """Return ``(xmask, zmask, number_of_Y)`` in big-endian bit order."""
        n = self.n_qubits
        x = z = ny = 0
        for q, c in enumerate(self.letters):
            bit = 1 << (n - 1 - q)
            if c in "XY":
                x |= bit
            if c in "ZY":
                z |= bit
            ny += c == "Y"
        return x, z, ny

    def symplectic(self) -> np.ndarray:
        """Binary vector ``(x | z)`` of length ``2n``."""
        x = [c in "XY" for c in self.letters]
        z = [c in "ZY" for c in self.letters]
        return np.array(x + z, dtype=np.uint8)

    def commutes_with(self, other: "PauliString") -> bool:
        self._check_size(other)
        anti = sum(
            a != "I" and b != "I" and a != b for a, b in zip(self.letters, other.letters)
        )
        return anti % 2 == 0

    def __mul__(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Product ``self @ other = phase * result``; ``result`` carries the real weights."""
        self._check_size(other)
        phase = 1 + 0j
        out = []
        for a, b in zip(self.letters, other.letters):
            p, c = _PRODUCT[a, b]
            phase *= p
            out.append(c)
        return phase, PauliString("".join(out), self.coefficient * other.coefficient)

    def matrix(self) -> np.ndarray:
        return pauli_matrix(self)

    def _check_size(self, other):
        if other.n_qubits != self.n_qubits:
            raise ValueError(
                f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}"
            )

    def __str__(self):
        if self.coefficient == 1.0:
            return self.letters
        return f"{self.coefficient:g}*{self.letters}"


def pauli_matrix(p: PauliString | str) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a Pauli string, coefficient included."""
    if isinstance(p, str):
        p = PauliString.parse(p)
    x, z, ny = p.masks()
    return pauli_dense(p.n_qubits, x, z, ny, p.coefficient)


def pauli_matrix_kron(p: PauliString) -> np.ndarray:
    """Reference construction by explicit Kronecker products."""
    return p.coefficient * reduce(np.kron, [SINGLE_QUBIT[c] for c in p.letters])


def n_qubits_of(op: np.ndarray) -> int:
    dim = op.shape[0]
    n = dim.bit_length() - 1
    if op.ndim != 2 or op.shape[1] != dim or 1 << n != dim:
        raise ValueError(f"operator shape {op.shape} is not 2^n x 2^n")
    return n


def is_hermitian(op: np.ndarray, atol: float = 1e-12) -> bool:
    scale = max(1.0, float(np.abs(op).max(initial=0.0)))
    return bool(np.abs(op - op.conj().T).max(initial=0.0) <= atol * scale)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def operator_norm(op: np.ndarray) -> float:
    if op.size == 0:
        return 0.0
    return float(np.linalg.norm(op, 2))


def qubit_support(op: np.ndarray, atol: float = 1e-12) -> tuple[int, ...]:
    """Qubits on which ``op`` does not act as the identity."""
    n = n_qubits_of(op)
    t = op.reshape((2,) * (2 * n))
    support = []
    for q in range(n):
        # op = M_rest (x) I_q  <=>  partial trace over q reproduces it
        reduced = np.trace(t, axis1=q, axis2=n + q) / 2
        rebuilt = np.multiply.outer(reduced, np.eye(2))
        # move the identity axes back to positions q and n+q
        order = list(range(2 * n - 2))
        order.insert(q, 2 * n - 2)
        order.insert(n + q, 2 * n - 1)
        rebuilt = np.transpose(rebuilt, order)
        if np.abs(rebuilt - t).max() > atol * max(1.0, np.abs(op).max()):
            support.append(q)
    return tuple(support)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (m + m.conj().T) / 2


@dataclass(frozen=True, eq=False)
class Level:
    energy: float
    projector: np.ndarray
    multiplicity: int


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Distinct eigenvalues in increasing order with orthogonal eigenprojectors."""

    levels: tuple[Level, ...]
    grouping_tol: float

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    @property
    def projectors(self) -> list[np.ndarray]:
        return [lv.projector for lv in self.levels]

    @property
    def ground(self) -> Level:
        return self.levels[0]

    @property
    def dim(self) -> int:
        return self.levels[0].projector.shape[0]

    def reconstruct(self) -> np.ndarray:
        return sum(lv.energy * lv.projector for lv in self.levels)

    def __len__(self):
        return len(self.levels)


def spectral_decompose(
    h: np.ndarray, grouping_tol: float | None = None
) -> SpectralDecomposition:
    """Group the eigenvalues of a Hermitian matrix into degenerate levels.

    Eigenvalues whose consecutive gaps are within ``grouping_tol`` merge into
    one level. The default tolerance is ``1e-8`` times the spectral range. A
    merged cluster wider than ``10 * grouping_tol`` means the tolerance chains
    through a near-continuum and is rejected.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not is_hermitian(h):
        raise ValueError("spectral_decompose requires a Hermitian operator")
    evals, evecs = np.linalg.eigh((h + h.conj().T) / 2)
    if grouping_tol is None:
        span = evals[-1] - evals[0]
        # floor: eigh noise scales with the largest |eigenvalue|
        grouping_tol = max(1e-8 * span, 1e-12 * np.abs(evals).max(initial=0.0), 1e-14)
    if grouping_tol <= 0:
        raise ValueError("grouping_tol must be positive")

    clusters = [[0]]
    for i in range(1, len(evals)):
        if evals[i] - evals[i - 1] <= grouping_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    levels = []
    for idx in clusters:
        if evals[idx[-1]] - evals[idx[0]] > 10 * grouping_tol:
            raise AmbiguousGroupingError(
                f"eigenvalue cluster [{evals[idx[0]]:.6g}, {evals[idx[-1]]:.6g}] "
                f"spans more than 10x grouping_tol={grouping_tol:.3g}"
            )
        v = evecs[:, idx]
        levels.append(Level(float(np.mean(evals[idx])), v @ v.conj().T, len(idx)))
    return SpectralDecomposition(tuple(levels), float(grouping_tol))


def pauli_sum(terms: Sequence[tuple[PauliString | str, float]], n: int) -> np.ndarray:
    """``sum_j c_j P_j`` as a dense matrix; ``n`` fixes the size of an empty sum."""
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for p, c in terms:
        if isinstance(p, str):
            p = PauliString.parse(p)
        if p.n_qubits != n:
            raise ValueError(f"term {p} does not act on {n} qubits")
        out += c * pauli_matrix(p)
    return out
