import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epsuppress.errors import AmbiguousGroupingError
from epsuppress.operators import (
    PauliString, commutator, is_hermitian, operator_norm, pauli_matrix, pauli_matrix_kron,
    pauli_sum, qubit_support, random_hermitian, spectral_decompose,
)

paulis = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


def test_single_qubit_matrices():
    assert np.allclose(pauli_matrix("X"), [[0, 1], [1, 0]])
    assert np.allclose(pauli_matrix("Y"), [[0, -1j], [1j, 0]])
    assert np.allclose(pauli_matrix("Z"), [[1, 0], [0, -1]])


def test_qubit_zero_is_leftmost_factor():
    z0 = pauli_matrix("ZI")
    assert np.allclose(np.diag(z0).real, [1, 1, -1, -1])


def test_parse_sign_and_weight():
    p = PauliString.parse("-ZIZ")
    assert p.coefficient == -1.0 and p.weight == 2 and p.support == (0, 2)
    assert np.allclose(p.matrix(), -pauli_matrix("ZIZ"))
    with pytest.raises(ValueError):
        PauliString.parse("XQ")


@settings(max_examples=60, deadline=None)
@given(paulis)
def test_kernel_matches_kron_construction(label):
    p = PauliString(label)
    assert np.array_equal(pauli_matrix(p), pauli_matrix_kron(p))


@settings(max_examples=60, deadline=None)
@given(paulis.flatmap(lambda a: st.tuples(st.just(a), st.text("IXYZ", min_size=len(a), max_size=len(a)))))
def test_product_and_commutation_agree_with_matrices(pair):
    a, b = PauliString(pair[0]), PauliString(pair[1])
    phase, c = a * b
    ma, mb = a.matrix(), b.matrix()
    assert np.allclose(ma @ mb, phase * c.matrix())
    assert a.commutes_with(b) == np.allclose(commutator(ma, mb), 0)


@settings(max_examples=30, deadline=None)
@given(paulis)
def test_pauli_is_hermitian_unitary(label):
    m = pauli_matrix(label)
    assert is_hermitian(m)
    assert np.allclose(m @ m, np.eye(m.shape[0]))


def test_qubit_support():
    assert qubit_support(pauli_matrix("IXIZ")) == (1, 3)
    assert qubit_support(np.eye(8)) == ()
    h = np.kron(np.kron(np.eye(2), random_hermitian(2, np.random.default_rng(0))), np.eye(2))
    assert qubit_support(h) == (1,)


def test_spectral_decomposition_reconstructs(rng):
    h = pauli_sum([("ZZI", 1.0), ("IZZ", 1.0), ("XII", 0.3)], 3)
    dec = spectral_decompose(h)
    assert np.allclose(dec.reconstruct(), h)
    assert sum(lv.multiplicity for lv in dec.levels) == 8
    assert np.all(np.diff(dec.energies) > 0)
    for i, p in enumerate(dec.projectors):
        assert np.allclose(p @ p, p)
        for q in dec.projectors[i + 1:]:
            assert np.allclose(p @ q, 0)


def test_degenerate_levels_are_grouped():
    h = pauli_sum([("ZZ", 1.0)], 2)
    dec = spectral_decompose(h)
    assert [lv.multiplicity for lv in dec.levels] == [2, 2]


def test_ambiguous_grouping_is_reported():
    # a chain of near-equal eigenvalues whose spread far exceeds the tolerance
    h = np.diag(np.r_[np.arange(25) * 1e-9, np.ones(7)]).astype(complex)
    with pytest.raises(AmbiguousGroupingError):
        spectral_decompose(h, grouping_tol=2e-9)


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        spectral_decompose(np.array([[0, 1], [0, 0]], dtype=complex))


def test_operator_norm():
    assert operator_norm(3 * pauli_matrix("XY")) == pytest.approx(3.0)
