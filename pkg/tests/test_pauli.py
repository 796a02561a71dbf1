import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randdd.errors import DimensionError, ResourceError
from randdd.groups import G8_LISTING, g8_group
from randdd.pauli import (MAX_DENSE_QUBITS, PauliString, conjugate_matrix, conjugate_term,
                          decompose_matrix, monomial_action, pauli_mul, pauli_to_matrix)

_SINGLE = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
}


def kron_matrix(letters, phase=0):
    """Dense reference built from single-site matrices."""
    m = np.array([[1.0 + 0j]])
    for ch in letters:
        m = np.kron(m, _SINGLE[ch])
    return (1j ** phase) * m


def paulis(n_max=4):
    return st.integers(1, n_max).flatmap(lambda n: st.tuples(
        st.text("IXYZ", min_size=n, max_size=n), st.integers(0, 3)))


def test_x_times_z_is_minus_i_y():
    p = PauliString.from_letters("X") * PauliString.from_letters("Z")
    assert p.letters == "Y"
    assert p.coefficient == -1j


def test_xy_is_i_z():
    p = PauliString.from_letters("X") * PauliString.from_letters("Y")
    assert (p.letters, p.coefficient) == ("Z", 1j)


@pytest.mark.parametrize("text", G8_LISTING)
def test_g8_element_times_dagger_is_identity(text):
    g = PauliString.parse(text, 8)
    prod = g * g.dagger()
    assert prod.is_identity() and prod.phase == 0


def test_g8_product_matches_dense_oracle():
    a = PauliString.parse("Z3Z4Y5Y6X7X8", 8)
    b = PauliString.parse("Z2Y3X4Z6Y7X8", 8)
    dense = kron_matrix(a.letters) @ kron_matrix(b.letters)
    # frozen from the 256x256 product: -1 Z2X3Y4Y5X6Z7
    assert decompose_matrix(dense) == PauliString.parse("-1 Z2X3Y4Y5X6Z7", 8)
    assert a * b == PauliString.parse("-1 Z2X3Y4Y5X6Z7", 8)


def test_g8_closed_under_products_by_dense_oracle():
    g = g8_group()
    for a in g.elements:
        for b in g.elements:
            dense = pauli_to_matrix(a) @ pauli_to_matrix(b)
            assert decompose_matrix(dense) == a * b


@settings(max_examples=200, deadline=None)
@given(paulis(), st.data())
def test_product_matches_dense(pa, data):
    letters_a, pha = pa
    n = len(letters_a)
    letters_b = data.draw(st.text("IXYZ", min_size=n, max_size=n))
    phb = data.draw(st.integers(0, 3))
    a = PauliString.from_letters(letters_a, pha)
    b = PauliString.from_letters(letters_b, phb)
    ref = kron_matrix(letters_a, pha) @ kron_matrix(letters_b, phb)
    np.testing.assert_allclose(pauli_to_matrix(pauli_mul(a, b)), ref, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(paulis())
def test_matrix_matches_kron(p):
    letters, ph = p
    np.testing.assert_allclose(PauliString.from_letters(letters, ph).to_matrix(),
                               kron_matrix(letters, ph), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(paulis())
def test_text_round_trip(p):
    letters, ph = p
    s = PauliString.from_letters(letters, ph)
    assert PauliString.parse(str(s), len(letters)) == s


@settings(max_examples=100, deadline=None)
@given(paulis(), st.data())
def test_commutes_matches_dense(pa, data):
    letters_a, _ = pa
    n = len(letters_a)
    letters_b = data.draw(st.text("IXYZ", min_size=n, max_size=n))
    a, b = PauliString.from_letters(letters_a), PauliString.from_letters(letters_b)
    ma, mb = a.to_matrix(), b.to_matrix()
    assert a.commutes(b) == np.allclose(ma @ mb, mb @ ma)


def test_text_forms():
    assert str(PauliString.parse("Z3Z4Y5Y6X7X8", 8)) == "+1 Z3Z4Y5Y6X7X8"
    assert str(PauliString.identity(3)) == "+1 I"
    assert PauliString.parse("-i X2Z5", 5) == PauliString.from_sites(5, {2: "X", 5: "Z"}, phase=3)


@pytest.mark.parametrize("bad", ["", "Q1", "X1X1", "X9", "+ X1"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        PauliString.parse(bad, 4)


def test_single_qubit_matrices():
    np.testing.assert_array_equal(PauliString.from_letters("Z").to_matrix(), np.diag([1, -1]))
    expected = np.zeros((4, 4))
    for r, c in [(0, 1), (1, 0), (2, 3), (3, 2)]:
        expected[r, c] = 1
    np.testing.assert_array_equal(PauliString.from_sites(2, {2: "X"}).to_matrix(), expected)


@settings(max_examples=50, deadline=None)
@given(paulis())
def test_non_identity_traceless(p):
    letters, ph = p
    s = PauliString.from_letters(letters, ph)
    if not s.is_identity():
        assert abs(np.trace(s.to_matrix())) < 1e-12


def test_conjugate_term_examples():
    x1, z1 = PauliString.from_letters("X"), PauliString.from_letters("Z")
    assert conjugate_term(x1, z1) == PauliString.from_letters("Z", phase=2)
    g = PauliString.from_sites(2, {2: "X"})
    zz = PauliString.from_letters("ZZ")
    assert conjugate_term(g, zz) == zz.with_phase(2)
    ident = PauliString.identity(2)
    assert conjugate_term(g, ident) == ident


@settings(max_examples=100, deadline=None)
@given(paulis(3), st.data())
def test_conjugation_matches_dense(pa, data):
    letters_g, phg = pa
    n = len(letters_g)
    letters_t = data.draw(st.text("IXYZ", min_size=n, max_size=n))
    g = PauliString.from_letters(letters_g, phg)
    t = PauliString.from_letters(letters_t)
    mg = g.to_matrix()
    ref = mg.conj().T @ t.to_matrix() @ mg
    np.testing.assert_allclose(conjugate_term(g, t).to_matrix(), ref, atol=1e-12)
    rng = np.random.default_rng(n)
    m = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
    np.testing.assert_allclose(conjugate_matrix(g, m), mg.conj().T @ m @ mg, atol=1e-12)


def test_monomial_action_columns():
    p = PauliString.from_letters("YXZ", phase=1)
    target, values = monomial_action(p)
    m = p.to_matrix()
    for c in range(8):
        col = np.zeros(8, complex)
        col[target[c]] = values[c]
        np.testing.assert_allclose(m[:, c], col)


def test_size_mismatch_errors():
    with pytest.raises(DimensionError):
        PauliString.identity(2) * PauliString.identity(3)
    with pytest.raises(DimensionError):
        conjugate_term(PauliString.identity(2), PauliString.identity(3))


def test_dense_guard():
    with pytest.raises(ResourceError):
        PauliString.identity(MAX_DENSE_QUBITS + 1).to_matrix()


def test_support_and_weight():
    p = PauliString.parse("X2Z4", 5)
    assert p.support() == [2, 4]
    assert p.weight == 2
