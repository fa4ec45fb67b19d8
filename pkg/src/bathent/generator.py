"""Lindblad generators of two d-level parties sharing a bath.

Conventions
-----------
The generator acts as ``L[rho] = -i[H_eff, rho] + D[rho]`` with

    H_eff = sum_i h1_i F_i x I + sum_i h2_i I x F_i + sum_ij h12_ij F_i x F_j

and, writing ``G = (F_1 x I, ..., F_n x I, I x F_1, ..., I x F_n)``,

    D[rho] = sum_ab K_ab (G_a rho G_b - 1/2 {G_b G_a, rho}),
    K = [[A, B], [B^dagger, C]].

With this ordering the dynamics is completely positive exactly when K is
positive semidefinite. Superoperators act on column-stacked density matrices,
``vec(X A Y) = (Y^T kron X) vec(A)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .basis import BasisSet

__all__ = [
    "TOL_PSD",
    "KossakowskiBlocks",
    "HamiltonianSpec",
    "GeneratorModel",
    "Superoperator",
    "CpReport",
    "validate_cp",
    "build_superoperator",
    "partial_transpose_conjugate",
    "partial_transpose_superoperator",
    "apply",
    "vec",
    "unvec",
    "choi_matrix",
    "local_operators",
]

TOL_PSD = 1e-10
_HERM_TOL = 1e-12


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stack a matrix."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def _hermitian_error(x: np.ndarray) -> float:
    return float(np.max(np.abs(x - x.conj().T))) if x.size else 0.0


@dataclass(frozen=True, eq=False)
class KossakowskiBlocks:
    """Blocks of ``K = [[A, B], [B^dagger, C]]``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        for name in "ABC":
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=np.complex128))
        n = self.A.shape[0]
        for name in "ABC":
            if getattr(self, name).shape != (n, n):
                raise ValueError(
                    f"Kossakowski block {name} has shape {getattr(self, name).shape}, expected ({n}, {n})"
                )
        for name in "AC":
            err = _hermitian_error(getattr(self, name))
            if err > _HERM_TOL * max(1.0, float(np.max(np.abs(getattr(self, name))))):
                raise ValueError(f"Kossakowski block {name} is not Hermitian (max deviation {err:.3g})")

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @property
    def K(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.B.conj().T, self.C]])

    @classmethod
    def zeros(cls, n: int) -> "KossakowskiBlocks":
        z = np.zeros((n, n), dtype=np.complex128)
        return cls(z, z.copy(), z.copy())

    def scaled(self, factor: float) -> "KossakowskiBlocks":
        return KossakowskiBlocks(factor * self.A, factor * self.B, factor * self.C)


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """Real coefficients of the local and bath-mediated Hamiltonian terms."""

    h1: np.ndarray
    h2: np.ndarray
    h12: np.ndarray

    def __post_init__(self):
        for name in ("h1", "h2", "h12"):
            arr = np.asarray(getattr(self, name))
            if np.iscomplexobj(arr):
                if np.any(arr.imag != 0):
                    raise ValueError(f"Hamiltonian coefficients {name} must be real")
                arr = arr.real
            arr = np.array(arr, dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"Hamiltonian coefficients {name} must be finite")
            object.__setattr__(self, name, arr)
        n = self.h1.shape[0] if self.h1.ndim == 1 else -1
        if self.h1.shape != (n,) or self.h2.shape != (n,) or self.h12.shape != (n, n):
            raise ValueError(
                f"inconsistent Hamiltonian shapes h1{self.h1.shape} h2{self.h2.shape} h12{self.h12.shape}"
            )

    @classmethod
    def zeros(cls, n: int) -> "HamiltonianSpec":
        return cls(np.zeros(n), np.zeros(n), np.zeros((n, n)))


@dataclass(frozen=True, eq=False)
class GeneratorModel:
    basis: BasisSet
    kossakowski: KossakowskiBlocks
    hamiltonian: HamiltonianSpec

    def __post_init__(self):
        n = self.basis.size
        if self.kossakowski.size != n:
            raise ValueError(
                f"Kossakowski blocks are {self.kossakowski.size}x{self.kossakowski.size} "
                f"but the basis has {n} elements"
            )
        if self.hamiltonian.h1.shape[0] != n:
            raise ValueError(
                f"Hamiltonian has {self.hamiltonian.h1.shape[0]} coefficients per party "
                f"but the basis has {n} elements"
            )

    @property
    def d(self) -> int:
        return self.basis.d

    @property
    def dim(self) -> int:
        return self.basis.d**2

    @classmethod
    def from_arrays(
        cls,
        basis: BasisSet,
        A=None,
        B=None,
        C=None,
        h1=None,
        h2=None,
        h12=None,
    ) -> "GeneratorModel":
        """Convenience constructor; omitted pieces are zero."""
        n = basis.size
        zc = np.zeros((n, n), dtype=np.complex128)
        blocks = KossakowskiBlocks(
            zc if A is None else A, zc if B is None else B, zc if C is None else C
        )
        ham = HamiltonianSpec(
            np.zeros(n) if h1 is None else h1,
            np.zeros(n) if h2 is None else h2,
            np.zeros((n, n)) if h12 is None else h12,
        )
        return cls(basis, blocks, ham)


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Matrix of a linear map on D x D matrices in the column-stacking convention."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.dim**2, self.dim**2):
            raise ValueError(f"superoperator of dimension {self.dim} must be {self.dim**2} square")

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.dim, self.matrix @ other.matrix)


@dataclass(frozen=True)
class CpReport:
    eigenvalues: tuple[float, ...]
    min_eigenvalue: float
    is_cp: bool


def validate_cp(blocks: KossakowskiBlocks, tol: float = TOL_PSD) -> CpReport:
    """Complete positivity check: the assembled K must be positive semidefinite."""
    eig = np.linalg.eigvalsh(blocks.K)
    lo = float(eig[0]) if eig.size else 0.0
    return CpReport(tuple(float(e) for e in eig), lo, lo >= -tol)


def local_operators(basis: BasisSet) -> np.ndarray:
    """Stack ``(F_k x I)_k`` followed by ``(I x F_k)_k``."""
    eye = np.eye(basis.d, dtype=np.complex128)
    first = np.array([np.kron(f, eye) for f in basis.elements])
    second = np.array([np.kron(eye, f) for f in basis.elements])
    return np.concatenate([first, second])


def _hamiltonian_matrix(model: GeneratorModel) -> np.ndarray:
    F = model.basis.elements
    eye = np.eye(model.d, dtype=np.complex128)
    h = model.hamiltonian
    H1 = np.tensordot(h.h1, F, axes=1)
    H2 = np.tensordot(h.h2, F, axes=1)
    H = np.kron(H1, eye) + np.kron(eye, H2)
    if np.any(h.h12):
        H = H + np.einsum("ij,iab,jcd->acbd", h.h12, F, F).reshape(model.dim, model.dim)
    return H


def build_superoperator(model: GeneratorModel) -> Superoperator:
    """Matrix of ``rho -> -i[H_eff, rho] + D[rho]``."""
    D = model.dim
    eye = np.eye(D, dtype=np.complex128)
    K = model.kossakowski.K
    G = local_operators(model.basis)
    H = _hamiltonian_matrix(model)
    gamma = np.einsum("ab,bij,ajk->ik", K, G, G)
    eff = 0.5 * gamma + 1j * H  # rho -> -(eff rho + rho eff^dagger)
    mat = _kernels.sandwich_superoperator(K, G)
    mat -= np.kron(eye, eff) + np.kron(eff.conj(), eye)
    return Superoperator(D, mat)


def partial_transpose_conjugate(model: GeneratorModel) -> GeneratorModel:
    """Model whose generator is ``T2 o L o T2`` (T2: transposition of party 2).

    Party 1 is untouched. The party-2 Kossakowski block becomes
    ``eta_i eta_j C_ji``; the cross block becomes ``-(Re B + i h12) diag(eta)``;
    the party-2 Hamiltonian flips to ``-eta h2`` and ``Im B`` reappears as a
    Hamiltonian coupling ``-Im(B) diag(eta)``. The map is an involution.
    """
    eta = model.basis.signs.astype(np.float64)
    A, B, C = model.kossakowski.A, model.kossakowski.B, model.kossakowski.C
    h = model.hamiltonian
    B_t = -(B.real + 1j * h.h12) * eta[None, :]
    C_t = np.outer(eta, eta) * C.T
    h2_t = -eta * h.h2
    h12_t = -B.imag * eta[None, :]
    return GeneratorModel(
        model.basis,
        KossakowskiBlocks(A.copy(), B_t, C_t),
        HamiltonianSpec(h.h1.copy(), h2_t, h12_t),
    )


def partial_transpose_superoperator(d: int) -> Superoperator:
    """Permutation matrix P with ``P vec(X) = vec(X^{T_2})`` on C^d x C^d."""
    D = d * d
    idx = np.arange(D * D).reshape(d, d, d, d, order="F")
    # vec index of X[(a,b),(c,e)] is (c*d+e)*D + a*d + b; stored in F order as [b, a, e, c]
    perm = idx.transpose(2, 1, 0, 3).reshape(-1, order="F")
    P = np.zeros((D * D, D * D))
    P[np.arange(D * D), perm] = 1.0
    return Superoperator(D, P)


def apply(superop: Superoperator, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X)
    if X.shape != (superop.dim, superop.dim):
        raise ValueError(f"operand has shape {X.shape}, expected ({superop.dim}, {superop.dim})")
    return unvec(superop.matrix @ vec(X), superop.dim)


def choi_matrix(superop: Superoperator) -> np.ndarray:
    """``sum_ij |i><j| kron Phi(|i><j|)``."""
    D = superop.dim
    # S[c_out*D + r_out, j*D + i] = Phi(E_ij)[r_out, c_out]
    S = superop.matrix.reshape(D, D, D, D)
    return S.transpose(3, 1, 2, 0).reshape(D * D, D * D)
