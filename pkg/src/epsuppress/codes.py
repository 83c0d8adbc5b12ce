"""Stabilizer subspace codes, penalty Hamiltonians and logical encoding."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import CodeError
from .operators import (
    PauliString,
    commutator,
    operator_norm,
    pauli_matrix,
    spectral_decompose,
)


def _gf2_rank(rows: np.ndarray) -> int:
    m = rows.copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        pivot = next((r for r in range(rank, m.shape[0]) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def _logical_key(label: str | tuple[int, str]) -> tuple[int, str]:
    if isinstance(label, tuple):
        q, letter = label
        return int(q), letter.upper()
    label = label.strip()
    letter, rest = label[0].upper(), label[1:]
    return (int(rest) if rest else 0), letter


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    """Commuting, independent Pauli generators plus a logical-operator map.

    ``logicals`` maps ``(logical_qubit, letter)`` (or strings such as ``"X0"``)
    to physical Pauli strings. A missing ``Y`` is derived as ``i X Z``.
    """

    generators: tuple[PauliString, ...]
    logicals: Mapping[tuple[int, str], PauliString] = field(default_factory=dict)
    n_physical: int | None = None
    name: str = ""

    def __post_init__(self):
        gens = tuple(
            PauliString.parse(g) if isinstance(g, str) else g for g in self.generators
        )
        logicals = {
            _logical_key(k): PauliString.parse(v) if isinstance(v, str) else v
            for k, v in dict(self.logicals).items()
        }
        n = self.n_physical
        if n is None:
            sizes = {g.n_qubits for g in gens} | {p.n_qubits for p in logicals.values()}
            if len(sizes) != 1:
                raise CodeError("cannot infer n_physical from generators and logicals")
            n = sizes.pop()
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "logicals", logicals)
        object.__setattr__(self, "n_physical", n)
        self._validate()

    def _validate(self):
        n = self.n_physical
        for g in self.generators:
            if g.n_qubits != n:
                raise CodeError(f"generator {g} does not act on {n} qubits")
            if abs(g.coefficient) != 1.0:
                raise CodeError(f"generator {g} must have coefficient +-1")
        for i, a in enumerate(self.generators):
            for b in self.generators[i + 1:]:
                if not a.commutes_with(b):
                    raise CodeError(f"generators {a} and {b} anticommute")
        if self.generators:
            rows = np.array([g.symplectic() for g in self.generators])
            if _gf2_rank(rows) != len(self.generators):
                raise CodeError("stabilizer generators are not independent")
        for key, op in self.logicals.items():
            if op.n_qubits != n:
                raise CodeError(f"logical {key} does not act on {n} qubits")
            for g in self.generators:
                if not op.commutes_with(g):
                    raise CodeError(f"logical {key}={op} anticommutes with generator {g}")
        for (q, letter), op in self.logicals.items():
            for (q2, letter2), op2 in self.logicals.items():
                if letter == "Y" or letter2 == "Y" or (q, letter) >= (q2, letter2):
                    continue
                should_anticommute = q == q2 and letter != letter2
                if op.commutes_with(op2) == should_anticommute:
                    raise CodeError(
                        f"logicals {letter}{q}={op} and {letter2}{q2}={op2} have the wrong "
                        "commutation relation"
                    )

    @property
    def n_logical_max(self) -> int:
        return self.n_physical - len(self.generators)

    def logical(self, qubit: int, letter: str) -> tuple[complex, PauliString]:
        """Physical representative of a logical Pauli as ``phase * string``."""
        letter = letter.upper()
        if letter == "I":
            return 1.0, PauliString("I" * self.n_physical)
        key = (qubit, letter)
        if key in self.logicals:
            return 1.0, self.logicals[key]
        if letter == "Y" and (qubit, "X") in self.logicals and (qubit, "Z") in self.logicals:
            phase, p = self.logicals[qubit, "X"] * self.logicals[qubit, "Z"]
            return 1j * phase, p
        raise CodeError(f"no logical {letter} defined for logical qubit {qubit}")

    @cached_property
    def projector(self) -> np.ndarray:
        return codespace_projector(self)


def codespace_projector(code: StabilizerCode) -> np.ndarray:
    """``prod_j (I + S_j)/2`` over the generators."""
    dim = 1 << code.n_physical
    p = np.eye(dim, dtype=complex)
    for g in code.generators:
        p = p @ (np.eye(dim) + pauli_matrix(g)) / 2
    return p


def penalty_hamiltonian(code: StabilizerCode) -> tuple[np.ndarray, float]:
    """Shifted penalty ``sum_j (I - S_j)/2`` and its ground-state gap.

    Each eigenvalue counts violated generators, so the codespace sits at zero
    energy and the gap is 1 whenever there is at least one generator.
    """
    dim = 1 << code.n_physical
    hp = np.zeros((dim, dim), dtype=complex)
    for g in code.generators:
        hp += (np.eye(dim) - pauli_matrix(g)) / 2
    if not code.generators:
        return hp, float("inf")
    levels = spectral_decompose(hp).energies
    return hp, float(levels[1] - levels[0])


def detects(code: StabilizerCode, a: np.ndarray | PauliString | str, tol: float = 1e-10) -> bool:
    """Error-detection condition ``||P_C A P_C|| <= tol``."""
    if isinstance(a, (str, PauliString)):
        a = pauli_matrix(a)
    pc = code.projector
    if a.shape != pc.shape:
        raise ValueError(f"operator shape {a.shape} does not match code dimension {pc.shape}")
    return operator_norm(pc @ a @ pc) <= tol


@dataclass(frozen=True, eq=False)
class EncodedSystem:
    """``H = H_bar + eta_p * H_p`` with commuting parts."""

    h_bar: np.ndarray
    h_p: np.ndarray
    eta_p: float
    gap: float
    projector: np.ndarray
    code: StabilizerCode | None = None

    def __post_init__(self):
        if self.eta_p < 0:
            raise ValueError("eta_p must be non-negative")

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.h_bar + self.eta_p * self.h_p

    @property
    def n(self) -> int:
        return self.h_bar.shape[0].bit_length() - 1

    def with_eta(self, eta_p: float) -> "EncodedSystem":
        return EncodedSystem(self.h_bar, self.h_p, eta_p, self.gap, self.projector, self.code)


def logical_to_physical(code: StabilizerCode, logical: PauliString | str) -> np.ndarray:
    """Matrix of a logical Pauli string (letters index logical qubits)."""
    if isinstance(logical, str):
        logical = PauliString.parse(logical)
    phase = 1.0 + 0j
    acc = PauliString("I" * code.n_physical)
    for q, letter in enumerate(logical.letters):
        ph, op = code.logical(q, letter)
        ph2, acc = acc * op
        phase *= ph * ph2
    if abs(phase.imag) > 1e-12:
        raise CodeError(f"logical string {logical} maps to a non-Hermitian operator")
    return logical.coefficient * phase.real * pauli_matrix(acc)


def encode_logical(
    logical_terms: Sequence[tuple[PauliString | str, float]],
    code: StabilizerCode,
    eta_p: float,
) -> EncodedSystem:
    """Substitute logical operators into a logical Hamiltonian and add the penalty."""
    dim = 1 << code.n_physical
    h_bar = np.zeros((dim, dim), dtype=complex)
    for term, coeff in logical_terms:
        h_bar += coeff * logical_to_physical(code, term)
    h_p, gap = penalty_hamiltonian(code)
    if operator_norm(commutator(h_bar, h_p)) > 1e-10:
        raise CodeError("encoded Hamiltonian does not commute with the penalty")
    return EncodedSystem(h_bar, h_p, float(eta_p), gap, codespace_projector(code), code)


def _catalog():
    return {
        # [[4,2,2]]: detects every weight-1 Pauli
        "xxxx_zzzz": StabilizerCode(
            ("XXXX", "ZZZZ"),
            {"X0": "XIXI", "Z0": "ZZII", "X1": "XXII", "Z1": "ZIZI"},
            name="xxxx_zzzz",
        ),
        "zz": StabilizerCode(("ZZ",), {"X0": "XX", "Z0": "ZI"}, name="zz"),
        "repetition3": StabilizerCode(("ZZI", "IZZ"), {"X0": "XXX", "Z0": "ZII"}, name="repetition3"),
    }


CODE_CATALOG: dict[str, StabilizerCode] = _catalog()


def get_code(name: str) -> StabilizerCode:
    try:
        return CODE_CATALOG[name]
    except KeyError:
        raise CodeError(f"unknown code {name!r}; known: {sorted(CODE_CATALOG)}") from None
