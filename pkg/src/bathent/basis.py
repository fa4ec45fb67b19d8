"""Hermitian operator bases for d-level systems.

Every basis stores only the traceless elements F_1 .. F_{d^2-1}; the identity
never enters the dissipator sums. Each element carries its transposition sign
``eta_k`` defined by ``F_k.T == eta_k * F_k``.

Element ordering is part of the model-file contract:

* ``pauli_basis``: sigma_1, sigma_2, sigma_3 in the sigma_3 eigenbasis.
* ``gellmann_basis``: symmetric family, antisymmetric family, diagonal family;
  the off-diagonal families run over pairs (j, k), j < k, in row-major order.
* ``tensor_pauli_basis``: words over {I, X, Y, Z} in lexicographic order with
  the all-identity word removed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = [
    "BasisSet",
    "PAULI",
    "pauli_basis",
    "gellmann_basis",
    "tensor_pauli_basis",
    "basis_from_name",
]

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)
_PAULI_SIGNS = (1, -1, 1)
_PAULI_LABELS = "XYZ"


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Traceless Hermitian operator basis with ``Tr(F_i F_j) = norm_const * delta_ij``.

    ``kind`` and ``n_qubits`` identify the constructor so a model file can
    name the basis instead of spelling out its matrices.
    """

    d: int
    elements: np.ndarray
    signs: np.ndarray
    norm_const: float
    kind: str
    labels: tuple[str, ...] = field(default=())
    n_qubits: int | None = None

    def __post_init__(self):
        n = self.d * self.d - 1
        if self.elements.shape != (n, self.d, self.d):
            raise ValueError(
                f"expected {n} elements of shape ({self.d}, {self.d}), got {self.elements.shape}"
            )
        if self.signs.shape != (n,):
            raise ValueError("one transposition sign per element is required")

    @property
    def size(self) -> int:
        return self.elements.shape[0]

    def __len__(self) -> int:
        return self.size

    def same_as(self, other: "BasisSet") -> bool:
        return (
            self.kind == other.kind
            and self.d == other.d
            and self.n_qubits == other.n_qubits
        )


def _transpose_signs(elements: np.ndarray) -> np.ndarray:
    signs = np.empty(len(elements), dtype=np.int64)
    for k, f in enumerate(elements):
        if np.array_equal(f.T, f):
            signs[k] = 1
        elif np.array_equal(f.T, -f):
            signs[k] = -1
        else:
            raise ValueError(f"element {k} is neither symmetric nor antisymmetric")
    return signs


def pauli_basis() -> BasisSet:
    """Unnormalized Pauli matrices, ``Tr(s_i s_j) = 2 delta_ij``."""
    return BasisSet(
        d=2,
        elements=PAULI.copy(),
        signs=np.array(_PAULI_SIGNS, dtype=np.int64),
        norm_const=2.0,
        kind="pauli",
        labels=tuple(_PAULI_LABELS),
    )


def gellmann_basis(d: int) -> BasisSet:
    """Orthonormal generalized Gell-Mann matrices (``norm_const == 1``).

    >>> len(gellmann_basis(3)), int((gellmann_basis(3).signs < 0).sum())
    (8, 3)
    """
    if int(d) != d or d < 2:
        raise ValueError(f"gellmann_basis needs an integer d >= 2, got {d!r}")
    d = int(d)
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    sym, asym, diag, labels = [], [], [], []
    r = 1.0 / np.sqrt(2.0)
    for j, k in pairs:
        f = np.zeros((d, d), dtype=np.complex128)
        f[j, k] = f[k, j] = r
        sym.append(f)
        g = np.zeros((d, d), dtype=np.complex128)
        g[j, k] = -1j * r
        g[k, j] = 1j * r
        asym.append(g)
    for l in range(1, d):
        entries = np.zeros(d)
        entries[:l] = 1.0
        entries[l] = -float(l)
        diag.append(np.diag(entries / np.sqrt(l * (l + 1))).astype(np.complex128))
    labels = (
        [f"S{j}{k}" for j, k in pairs]
        + [f"A{j}{k}" for j, k in pairs]
        + [f"D{l}" for l in range(1, d)]
    )
    elements = np.array(sym + asym + diag)
    return BasisSet(
        d=d,
        elements=elements,
        signs=_transpose_signs(elements),
        norm_const=1.0,
        kind="gellmann",
        labels=tuple(labels),
    )


def tensor_pauli_basis(n: int) -> BasisSet:
    """All non-identity n-fold tensor products of {I, X, Y, Z} (``d = 2**n``)."""
    if int(n) != n or n < 1:
        raise ValueError(f"tensor_pauli_basis needs n >= 1 qubits, got {n!r}")
    n = int(n)
    factors = np.concatenate([np.eye(2, dtype=np.complex128)[None], PAULI])
    factor_signs = (1,) + _PAULI_SIGNS
    elements, signs, labels = [], [], []
    for word in product(range(4), repeat=n):
        if not any(word):
            continue
        f = np.ones((1, 1), dtype=np.complex128)
        s = 1
        for w in word:
            f = np.kron(f, factors[w])
            s *= factor_signs[w]
        elements.append(f)
        signs.append(s)
        labels.append("".join("IXYZ"[w] for w in word))
    return BasisSet(
        d=2**n,
        elements=np.array(elements),
        signs=np.array(signs, dtype=np.int64),
        norm_const=float(2**n),
        kind="tensor_pauli",
        labels=tuple(labels),
        n_qubits=n,
    )


def basis_from_name(kind: str, d: int | None = None, n: int | None = None) -> BasisSet:
    """Construct a basis from its model-file selector."""
    if kind == "pauli":
        if d not in (None, 2):
            raise ValueError("the pauli basis is only defined for d = 2")
        return pauli_basis()
    if kind == "gellmann":
        if d is None:
            raise ValueError("the gellmann basis needs a dimension d")
        return gellmann_basis(d)
    if kind == "tensor_pauli":
        if n is None:
            if d is None or d < 2 or d & (d - 1):
                raise ValueError("the tensor_pauli basis needs a qubit count n (or d = 2**n)")
            n = d.bit_length() - 1
        basis = tensor_pauli_basis(n)
        if d is not None and d != basis.d:
            raise ValueError(f"tensor_pauli with n={n} has d={basis.d}, not {d}")
        return basis
    raise ValueError(f"unknown basis {kind!r}; expected pauli, gellmann or tensor_pauli")
