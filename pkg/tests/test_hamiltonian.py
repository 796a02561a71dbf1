import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dipolar_dense, heisenberg_dense, nn_dense, site_op
from randdd.errors import ConfigError, DomainError, ValidationError
from randdd.hamiltonian import (Anisotropy, AnisotropyRealization, HamiltonianSpec,
                                anisotropy_delta, build_hamiltonian, check_hermitian,
                                coupling_profile, coupling_tensor, hamiltonian_terms,
                                rotating_frame_hamiltonian, spectral_norm, terms_to_matrix)


# frozen from a dense eigensolve of the Kronecker-built dipolar chain
KAPPA_DIPOLAR = {4: 6.3232, 6: 9.6896}


def test_profile_values():
    assert coupling_profile("dipolar", 1, 2) == 1.0
    assert coupling_profile("dipolar", 1, 3) == pytest.approx(1 / 8)
    assert coupling_profile("nearest_neighbor", 1, 3) == 0.0
    assert coupling_profile("nearest_neighbor", 4, 3, J=2.0) == 2.0


def test_profile_same_site():
    with pytest.raises(DomainError):
        coupling_profile("dipolar", 2, 2)


def test_delta_examples():
    ones = AnisotropyRealization((1.0,) * 5)
    assert anisotropy_delta(0.0, ones) == 0.0
    assert anisotropy_delta(0.05, ones) == pytest.approx(5.0, abs=1e-12)
    assert anisotropy_delta(0.1, ones) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(anisotropy_delta(np.array([0.0, 0.05]), ones), [0.0, 5.0],
                               atol=1e-12)


def test_anisotropy_sample_range():
    a = Anisotropy()
    real = a.sample(np.random.default_rng(3))
    assert len(real.rates) == 5
    assert all(0.9 <= r <= 1.1 for r in real.rates)
    assert a.max_rate == pytest.approx(11 * np.pi)


def test_anisotropy_rejects_empty_range():
    with pytest.raises(ValueError):
        Anisotropy(r_lo=1.2, r_hi=1.0)


def test_single_spin_field():
    _, h = build_hamiltonian(HamiltonianSpec(1, omega=1.0))
    np.testing.assert_allclose(h, np.diag([0.5, -0.5]))
    assert spectral_norm(h) == pytest.approx(0.5)


def test_two_spin_heisenberg_spectrum():
    _, h = build_hamiltonian(HamiltonianSpec(2, coupling="nearest_neighbor"))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h)), [-3, 1, 1, 1], atol=1e-12)
    assert spectral_norm(h) == pytest.approx(3.0)


def test_spectral_norm_zero():
    assert spectral_norm(np.zeros((4, 4))) == 0.0


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_dipolar_matches_kron(n):
    _, h = build_hamiltonian(HamiltonianSpec(n))
    np.testing.assert_allclose(h, dipolar_dense(n), atol=1e-13)


@pytest.mark.parametrize("n", [4, 6])
def test_dipolar_kappa(n):
    _, h = build_hamiltonian(HamiltonianSpec(n))
    check_hermitian(h)
    kappa = spectral_norm(h)
    assert kappa == pytest.approx(KAPPA_DIPOLAR[n], abs=1e-4)
    assert kappa == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(dipolar_dense(n)))))
    J = coupling_tensor(HamiltonianSpec(n))
    assert kappa <= np.abs(np.triu(J, 1)).sum() + 1e-12


def test_fields_and_detuning():
    spec = HamiltonianSpec(3, omega=2.0, coupling="nearest_neighbor", detuning=(0.1, 0.0, -0.3))
    _, h = build_hamiltonian(spec)
    ref = heisenberg_dense(3, {(1, 2): 1.0, (2, 3): 1.0}, {1: 2.1, 2: 2.0, 3: 1.7})
    np.testing.assert_allclose(h, ref, atol=1e-13)


def test_terms_and_matrix_agree():
    spec = HamiltonianSpec(4, omega=0.7)
    terms, h = build_hamiltonian(spec)
    np.testing.assert_allclose(terms_to_matrix(terms, 4), h)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.data())
def test_explicit_table_bound(n, data):
    vals = data.draw(st.lists(st.floats(-2, 2), min_size=3 * n * n, max_size=3 * n * n))
    arr = np.array(vals).reshape(3, n, n)
    arr = np.triu(arr, 1)
    arr = arr + arr.transpose(0, 2, 1)
    spec = HamiltonianSpec(n, omega=0.3, coupling="explicit", table=arr.tolist())
    _, h = build_hamiltonian(spec)
    check_hermitian(h)
    bound = n * 0.3 / 2 + np.abs(np.triu(arr, 1)).sum()
    assert spectral_norm(h) <= bound + 1e-9
    ref = sum(arr[a, i, j] * site_op(n, {i + 1: "XYZ"[a], j + 1: "XYZ"[a]})
              for a in range(3) for i in range(n) for j in range(i + 1, n))
    ref = ref + sum(0.15 * site_op(n, {i + 1: "Z"}) for i in range(n))
    np.testing.assert_allclose(h, ref, atol=1e-12)


@pytest.mark.parametrize("table", [
    np.ones((3, 2, 2)),                     # nonzero diagonal
    np.array([[[0, 1], [2, 0]]] * 3),       # asymmetric
    np.zeros((3, 3, 3)),                    # wrong shape
])
def test_explicit_table_rejected(table):
    with pytest.raises(ValueError):
        HamiltonianSpec(2, coupling="explicit", table=table.tolist())


def test_anisotropy_modulates_nn_zz():
    spec = HamiltonianSpec(3, coupling="nearest_neighbor", anisotropy=Anisotropy())
    static, modulated = hamiltonian_terms(spec)
    assert sorted(p.letters for _, p in modulated) == ["IZZ", "ZZI"]
    assert len(static) == 4
    real = AnisotropyRealization((1.0,) * 5)
    _, h = build_hamiltonian(spec, 0.05, real)
    # J^z on nearest neighbours is J * Delta(t), here Delta = 5
    ref = sum(site_op(3, {i: a, i + 1: a}) for i in (1, 2) for a in "XY")
    ref = ref + 5.0 * (site_op(3, {1: "Z", 2: "Z"}) + site_op(3, {2: "Z", 3: "Z"}))
    np.testing.assert_allclose(h, ref, atol=1e-12)


def test_anisotropy_requires_realization():
    spec = HamiltonianSpec(2, coupling="nearest_neighbor", anisotropy=Anisotropy())
    with pytest.raises(ConfigError):
        build_hamiltonian(spec, 0.1)


def test_rotating_frame_removes_common_field():
    spec, exact = rotating_frame_hamiltonian(HamiltonianSpec(3, omega=5.0))
    assert exact
    static, _ = hamiltonian_terms(spec)
    assert all(p.weight == 2 for _, p in static)


def test_rotating_frame_keeps_detuning():
    spec, _ = rotating_frame_hamiltonian(HamiltonianSpec(2, omega=5.0, detuning=(0.2, -0.4)))
    singles = {p.letters: c for c, p in hamiltonian_terms(spec)[0] if p.weight == 1}
    assert singles == pytest.approx({"ZI": 0.1, "IZ": -0.2})


def test_heisenberg_commutes_with_collective_z():
    h = nn_dense(4)
    zsum = sum(site_op(4, {i: "Z"}) for i in range(1, 5))
    assert np.linalg.norm(h @ zsum - zsum @ h) < 1e-12


def test_rotating_frame_flags_xy_anisotropy():
    table = np.zeros((3, 2, 2))
    table[0, 0, 1] = table[0, 1, 0] = 1.0
    spec = HamiltonianSpec(2, omega=1.0, coupling="explicit", table=table.tolist())
    assert rotating_frame_hamiltonian(spec)[1] is False


def test_check_hermitian_rejects():
    with pytest.raises(ValidationError):
        check_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        check_hermitian(np.zeros((2, 3)))


def test_spec_validation():
    with pytest.raises(ValueError):
        HamiltonianSpec(0)
    with pytest.raises(ValueError):
        HamiltonianSpec(2, coupling="ising")
    with pytest.raises(ValueError):
        HamiltonianSpec(2, detuning=(0.1,))
