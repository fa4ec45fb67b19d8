"""Ready-made generator models used in the tests and the shipped model files."""
from __future__ import annotations

import numpy as np

from .basis import pauli_basis, tensor_pauli_basis
from .generator import GeneratorModel

__all__ = [
    "symmetric_dissipation_model",
    "collective_qubit_blocks",
    "collective_four_qubit_model",
    "pair_reduction_model",
    "zero_model",
]


def symmetric_dissipation_model(x: float) -> GeneratorModel:
    """Two qubits with ``A = B = C = [[1, 0, i], [0, 0, 0], [-i, 0, x]]`` and no Hamiltonian.

    ``K`` is positive semidefinite for ``x >= 1``. From ``|00>`` the first-order
    witness is degenerate; the second-order coefficient on ``Psi_2 + Psi_3`` is
    ``16 x - 24``.
    """
    a = np.array([[1, 0, 1j], [0, 0, 0], [-1j, 0, x]], dtype=np.complex128)
    return GeneratorModel.from_arrays(pauli_basis(), a, a.copy(), a.copy())


def collective_qubit_blocks(x: float, z: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-qubit block ``C1`` and qubit-qubit block ``C2`` of the collective model."""
    c1 = np.array([[1, 1j * z, 0], [-1j * z, 1, 0], [0, 0, 0]], dtype=np.complex128)
    c2 = np.diag([x, -x, 0.0]).astype(np.complex128)
    return c1, c2


def collective_four_qubit_model(x: float, z: float) -> GeneratorModel:
    """Four qubits, qubits (1, 2) forming party 1 and (3, 4) party 2.

    The dissipator couples every qubit pair ``(p, q)`` through
    ``sum_ij K_{(p,i),(q,j)} sigma_i^(p) . sigma_j^(q)`` with ``K = C1`` for
    ``p == q`` and ``C2`` otherwise. Coefficients live on the single-qubit
    words of ``tensor_pauli_basis(2)``; all two-qubit words carry zero weight.
    ``K`` is positive semidefinite iff ``z**2 + 9 x**2 <= 1``.
    """
    basis = tensor_pauli_basis(2)
    c1, c2 = collective_qubit_blocks(x, z)
    n = basis.size
    # sigma_i x I sits at word (i, 0) -> index 4 i - 1; I x sigma_i at (0, i) -> i - 1
    slots = [[4 * i - 1 for i in (1, 2, 3)], [i - 1 for i in (1, 2, 3)]]
    A = np.zeros((n, n), dtype=np.complex128)
    B = np.zeros_like(A)
    C = np.zeros_like(A)
    for p in range(2):
        for q in range(2):
            blk = c1 if p == q else c2
            A[np.ix_(slots[p], slots[q])] = blk
            C[np.ix_(slots[p], slots[q])] = blk
            B[np.ix_(slots[p], slots[q])] = c2
    return GeneratorModel.from_arrays(basis, A, B, C)


def pair_reduction_model(x: float, z: float) -> GeneratorModel:
    """Two-qubit model ``K = [[C1, C2], [C2, C1]]`` left after tracing out one
    qubit of each pair of the collective four-qubit model."""
    c1, c2 = collective_qubit_blocks(x, z)
    return GeneratorModel.from_arrays(pauli_basis(), c1, c2, c1.copy())


def zero_model(basis) -> GeneratorModel:
    return GeneratorModel.from_arrays(basis)
