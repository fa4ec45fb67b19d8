import numpy as np
import pytest
from scipy.linalg import expm

from bathent.basis import gellmann_basis, pauli_basis, tensor_pauli_basis
from bathent.generator import (
    GeneratorModel,
    HamiltonianSpec,
    KossakowskiBlocks,
    Superoperator,
    apply,
    build_superoperator,
    choi_matrix,
    partial_transpose_conjugate,
    partial_transpose_superoperator,
    unvec,
    validate_cp,
    vec,
)
from bathent.models import collective_four_qubit_model, symmetric_dissipation_model
from bathent.witness import basis_state

from conftest import random_model, random_psd


def test_vec_is_column_stacking():
    x = np.arange(4).reshape(2, 2)
    assert list(vec(x)) == [0, 2, 1, 3]
    np.testing.assert_array_equal(unvec(vec(x)), x)


def test_kossakowski_rejects_non_hermitian_block():
    a = np.zeros((3, 3), dtype=complex)
    a[0, 1] = 1.0
    with pytest.raises(ValueError, match="Hermitian"):
        KossakowskiBlocks(a, np.zeros((3, 3)), np.zeros((3, 3)))


def test_kossakowski_rejects_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        KossakowskiBlocks(np.eye(3), np.zeros((3, 3)), np.eye(2))


def test_hamiltonian_rejects_complex_and_nonfinite():
    with pytest.raises(ValueError, match="real"):
        HamiltonianSpec(np.zeros(3), np.zeros(3), 1j * np.eye(3))
    with pytest.raises(ValueError, match="finite"):
        HamiltonianSpec(np.array([np.nan, 0, 0]), np.zeros(3), np.zeros((3, 3)))


def test_model_rejects_size_mismatch():
    with pytest.raises(ValueError):
        GeneratorModel(pauli_basis(), KossakowskiBlocks.zeros(8), HamiltonianSpec.zeros(8))


# ---- validate_cp -----------------------------------------------------------


def test_symmetric_dissipation_is_cp_at_threshold():
    rep = validate_cp(symmetric_dissipation_model(1.0).kossakowski)
    assert rep.is_cp
    assert list(rep.eigenvalues) == sorted(rep.eigenvalues)


@pytest.mark.parametrize("x,z", [(0.2, 0.5), (0.1, -0.3), (0.3, 0.0)])
def test_collective_model_spectrum(x, z):
    rep = validate_cp(collective_four_qubit_model(x, z).kossakowski)
    expected = sorted([1 + s * np.sqrt(x * x + z * z) for s in (1, -1)] + [1 + s * np.sqrt(9 * x * x + z * z) for s in (1, -1)])
    nonzero = np.array([e for e in rep.eigenvalues if abs(e) > 1e-9])
    distinct = nonzero[np.concatenate([[True], np.diff(nonzero) > 1e-9])]
    np.testing.assert_allclose(distinct, expected, atol=1e-10)
    assert rep.is_cp == (z * z + 9 * x * x <= 1)


def test_collective_model_not_cp_outside_disc():
    assert not validate_cp(collective_four_qubit_model(0.2, 0.9).kossakowski).is_cp


def test_zero_blocks_are_cp():
    rep = validate_cp(KossakowskiBlocks.zeros(3))
    assert rep.is_cp and rep.min_eigenvalue == 0


def test_validate_cp_unitary_invariance(rng):
    k = random_psd(6, rng) - 0.3 * np.eye(6)
    u, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    k2 = u @ k @ u.conj().T
    a = validate_cp(KossakowskiBlocks(k[:3, :3], k[:3, 3:], k[3:, 3:]))
    b = validate_cp(KossakowskiBlocks(k2[:3, :3], k2[:3, 3:], k2[3:, 3:]))
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)
    assert not a.is_cp and not b.is_cp


# ---- build_superoperator ------------------------------------------------------


def test_empty_generator_is_zero(backend):
    S = build_superoperator(GeneratorModel.from_arrays(pauli_basis()))
    assert not np.any(S.matrix)


def test_local_field_leaves_commuting_state_fixed(backend):
    m = GeneratorModel.from_arrays(pauli_basis(), h1=[0, 0, 0.7])
    rho = np.kron(np.diag([1.0, 0.0]), np.eye(2) / 2)
    np.testing.assert_allclose(apply(build_superoperator(m), rho), 0, atol=1e-15)


def _lindblad_direct(model, rho):
    """Dissipator and Hamiltonian written out term by term."""
    F = model.basis.elements
    d = model.d
    eye = np.eye(d)
    G = [np.kron(f, eye) for f in F] + [np.kron(eye, f) for f in F]
    K = model.kossakowski.K
    h = model.hamiltonian
    n = len(F)
    H = sum(h.h1[i] * G[i] + h.h2[i] * G[n + i] for i in range(n))
    H = H + sum(h.h12[i, j] * G[i] @ G[n + j] for i in range(n) for j in range(n))
    out = -1j * (H @ rho - rho @ H)
    for a in range(2 * n):
        for b in range(2 * n):
            gg = G[b] @ G[a]
            out += K[a, b] * (G[a] @ rho @ G[b] - 0.5 * (gg @ rho + rho @ gg))
    return out


@pytest.mark.parametrize("basis", [pauli_basis(), gellmann_basis(3)], ids=["d2", "d3"])
def test_superoperator_matches_termwise_generator(basis, backend, rng):
    m = random_model(basis, rng)
    rho = rng.standard_normal((m.dim, m.dim)) + 1j * rng.standard_normal((m.dim, m.dim))
    np.testing.assert_allclose(apply(build_superoperator(m), rho), _lindblad_direct(m, rho), atol=1e-12)


@pytest.mark.parametrize("basis", [pauli_basis(), gellmann_basis(3), tensor_pauli_basis(2)], ids=["d2", "d3", "d4"])
def test_trace_and_hermiticity_preservation(basis, rng):
    m = random_model(basis, rng)
    S = build_superoperator(m)
    x = rng.standard_normal((m.dim, m.dim)) + 1j * rng.standard_normal((m.dim, m.dim))
    assert abs(np.trace(apply(S, x))) < 1e-10
    np.testing.assert_allclose(apply(S, x.conj().T), apply(S, x).conj().T, atol=1e-10)


def test_maximally_mixed_state_trace_zero():
    S = build_superoperator(symmetric_dissipation_model(1.0))
    assert abs(np.trace(apply(S, np.eye(4) / 4))) < 1e-12


def test_superoperator_composition():
    S = Superoperator(4, np.eye(16))
    assert np.array_equal((S @ S).matrix, np.eye(16))
    with pytest.raises(ValueError):
        Superoperator(4, np.eye(4))
    with pytest.raises(ValueError):
        apply(S, np.eye(3))


# ---- partial-transpose conjugation ---------------------------------------------


@pytest.mark.parametrize("basis", [pauli_basis(), gellmann_basis(3)], ids=["d2", "d3"])
def test_conjugation_identity(basis, rng):
    P = partial_transpose_superoperator(basis.d).matrix
    for _ in range(5):
        m = random_model(basis, rng)
        lhs = build_superoperator(partial_transpose_conjugate(m)).matrix
        rhs = P @ build_superoperator(m).matrix @ P
        assert np.linalg.norm(lhs - rhs) < 1e-9


def test_partial_transpose_superoperator_matches_reshape(rng):
    d = 3
    x = rng.standard_normal((9, 9))
    P = partial_transpose_superoperator(d)
    want = x.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(9, 9)
    np.testing.assert_array_equal(apply(P, x), want)
    np.testing.assert_array_equal(P.matrix @ P.matrix, np.eye(81))


@pytest.mark.parametrize("basis", [pauli_basis(), gellmann_basis(3)], ids=["d2", "d3"])
def test_conjugation_is_involution(basis, rng):
    m = random_model(basis, rng)
    twice = partial_transpose_conjugate(partial_transpose_conjugate(m))
    np.testing.assert_allclose(build_superoperator(twice).matrix, build_superoperator(m).matrix, atol=1e-12)


@pytest.mark.parametrize("x", [1.0, 2.0, 1.3])
def test_symmetric_dissipation_conjugated_kossakowski(x):
    m = symmetric_dissipation_model(x)
    kt = partial_transpose_conjugate(m).kossakowski
    a = m.kossakowski.A
    np.testing.assert_allclose(kt.K, np.block([[a, -a.real], [-a.real, a.T]]), atol=1e-15)
    want = sorted([1 + np.sqrt(2), 1 - np.sqrt(2), x + np.sqrt(1 + x * x), x - np.sqrt(1 + x * x), 0, 0])
    np.testing.assert_allclose(np.linalg.eigvalsh(kt.K), want, atol=1e-10)


def test_conjugation_diagonal_case():
    c = np.diag([0.3, 0.5, 0.7])
    m = GeneratorModel.from_arrays(pauli_basis(), A=np.eye(3), C=c)
    kt = partial_transpose_conjugate(m).kossakowski
    np.testing.assert_allclose(np.diag(kt.C), np.diag(c))
    assert not np.any(kt.B)


def test_conjugated_kossakowski_need_not_be_psd():
    kt = partial_transpose_conjugate(symmetric_dissipation_model(1.0)).kossakowski
    assert not validate_cp(kt).is_cp


def test_symmetric_dissipation_second_order_element():
    m = symmetric_dissipation_model(1.2)
    S = build_superoperator(partial_transpose_conjugate(m))
    q = basis_state("00", 2).transposed_projector()
    phi = np.array([0, 1, 1, 0], dtype=complex)  # |01> + |10>
    first = apply(S, q)
    second = apply(S, first)
    assert np.vdot(phi, first @ phi).real == pytest.approx(0, abs=1e-12)
    assert np.vdot(phi, second @ phi).real == pytest.approx(16 * 1.2 - 24, rel=1e-12)


# ---- Choi matrix ------------------------------------------------------------------


def test_choi_of_identity_is_maximally_entangled_projector():
    S = Superoperator(2, np.eye(4))
    omega = np.array([1, 0, 0, 1.0])
    np.testing.assert_array_equal(choi_matrix(S), np.outer(omega, omega))


def test_choi_positive_for_psd_kossakowski(rng):
    for basis in (pauli_basis(), gellmann_basis(3)):
        m = random_model(basis, rng)
        S = build_superoperator(m)
        prop = Superoperator(m.dim, expm(0.01 * S.matrix))
        assert np.linalg.eigvalsh(choi_matrix(prop))[0] > -1e-8


def test_choi_detects_negative_kossakowski(rng):
    k = random_psd(6, rng)
    w, v = np.linalg.eigh(k)
    k = k - (w[0] + 0.2) * np.outer(v[:, 0], v[:, 0].conj())
    m = GeneratorModel.from_arrays(pauli_basis(), k[:3, :3], k[:3, 3:], k[3:, 3:])
    prop = Superoperator(4, expm(1e-3 * build_superoperator(m).matrix))
    assert np.linalg.eigvalsh(choi_matrix(prop))[0] < -1e-6
