"""First-order entanglement-generation criteria for a product state.

For ``Q = |psi><psi| x |phi><phi|`` the partially transposed projector is
``Q~ = |Psi_1><Psi_1|`` with ``Psi_1 = psi x conj(phi)``. Completing ``psi``
and ``conj(phi)`` to orthonormal bases ``{psi_k}``, ``{phi_l}`` gives the
product basis ``Psi_{d(k-1)+l} = psi_k x phi_l``. Only the ``2(d-1)`` vectors
with ``k = 1`` or ``l = 1`` (excluding ``Psi_1``) see a nonzero first-order
term, and their matrix elements of ``L~[Q~]`` form the witness matrix ``M``:

    C block   <v^a| C^T |v^b>                  (Psi = psi_1 x phi_{a+1})
    A block   <u^a| A |u^b>                    (Psi = psi_{a+1} x phi_1)
    cross     -<v^a| Re(B)^T - i h12^T |u^b>

with flip vectors ``u^a_i = <psi_1|F_i|psi_{a+1}>`` and
``v^a_i = eta_i <phi_1|F_i|phi_{a+1}>``. A negative principal minor that
mixes the two blocks certifies entanglement generation.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .basis import BasisSet
from .generator import (
    GeneratorModel,
    Superoperator,
    build_superoperator,
    partial_transpose_conjugate,
    validate_cp,
    vec,
    unvec,
)

__all__ = [
    "TOL_MINOR",
    "ProductState",
    "FlipVectors",
    "WitnessMatrix",
    "MinorReport",
    "FirstOrderVerdict",
    "Resolution",
    "product_state",
    "basis_state",
    "complement_basis",
    "flip_vectors",
    "witness_matrix",
    "witness_matrix_direct",
    "principal_minors",
    "first_order_verdict",
    "classify",
    "expansion_coefficient",
    "resolve_marginal",
    "WitnessContext",
    "Assessment",
    "assess",
]

TOL_MINOR = 1e-9
_NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProductState:
    psi: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        for name in ("psi", "phi"):
            x = np.array(getattr(self, name), dtype=np.complex128).reshape(-1)
            if abs(np.linalg.norm(x) - 1.0) > _NORM_TOL:
                raise ValueError(f"{name} must be a unit vector (norm {np.linalg.norm(x):.15g})")
            object.__setattr__(self, name, x)
        if self.psi.shape != self.phi.shape:
            raise ValueError("psi and phi must have the same dimension")

    @property
    def d(self) -> int:
        return self.psi.shape[0]

    def projector(self) -> np.ndarray:
        """``Q = |psi><psi| x |phi><phi|``."""
        v = np.kron(self.psi, self.phi)
        return np.outer(v, v.conj())

    def transposed_projector(self) -> np.ndarray:
        """``Q~ = |psi><psi| x |phi*><phi*|``."""
        v = np.kron(self.psi, self.phi.conj())
        return np.outer(v, v.conj())

    def canonical(self) -> "ProductState":
        """Same state with the first nonzero amplitude of each factor real and positive."""
        return ProductState(_fix_phase(self.psi), _fix_phase(self.phi))


def _fix_phase(x: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(x) > 1e-14)
    if nz.size == 0:
        return x.copy()
    ph = x[nz[0]] / abs(x[nz[0]])
    y = x / ph
    y[nz[0]] = abs(x[nz[0]])
    return y


def product_state(psi, phi) -> ProductState:
    """Normalize and wrap two vectors."""
    psi = np.asarray(psi, dtype=np.complex128)
    phi = np.asarray(phi, dtype=np.complex128)
    return ProductState(psi / np.linalg.norm(psi), phi / np.linalg.norm(phi))


def basis_state(label: str, d: int) -> ProductState:
    """Product of computational basis states from a digit string.

    The label splits into two equal halves, one per party; each half is the
    digit expansion of a basis index in the base ``b`` with ``b**len == d``.
    ``basis_state("01", 2)`` is ``|0> x |1>``; ``basis_state("0110", 4)`` is
    ``|01> x |10>``.
    """
    label = label.strip()
    if not label or len(label) % 2 or not label.isdigit():
        raise ValueError(f"basis-state label {label!r} must be an even-length digit string")
    half = len(label) // 2
    base = int(round(d ** (1.0 / half)))
    if base**half != d:
        raise ValueError(f"label {label!r} does not match local dimension {d}")
    vecs = []
    for part in (label[:half], label[half:]):
        digits = [int(c) for c in part]
        if max(digits) >= base:
            raise ValueError(f"digit out of range in {label!r} for base {base}")
        k = 0
        for c in digits:
            k = k * base + c
        e = np.zeros(d, dtype=np.complex128)
        e[k] = 1.0
        vecs.append(e)
    return ProductState(*vecs)


def complement_basis(x) -> np.ndarray:
    """Unitary whose first column is ``x``, completed by a Householder reflection.

    With ``x = e^{i theta} y`` and ``y_0 >= 0``, the columns are
    ``e^{i theta} H e_k`` where ``H`` reflects ``e_0`` onto ``y``. For ``x = e_0``
    this is the identity.
    """
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise ValueError("cannot complete the zero vector")
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError("complement_basis expects a unit vector")
    d = x.shape[0]
    ph = x[0] / abs(x[0]) if abs(x[0]) > 0 else 1.0
    y = x / ph
    w = -y
    w[0] += 1.0
    ww = np.vdot(w, w).real
    H = np.eye(d, dtype=np.complex128)
    if ww > 1e-30:
        H -= 2.0 * np.outer(w, w.conj()) / ww
    U = ph * H
    U[:, 0] = x
    return U


def _check_completion(U, first) -> np.ndarray:
    U = np.asarray(U, dtype=np.complex128)
    d = first.shape[0]
    if U.shape != (d, d) or np.max(np.abs(U.conj().T @ U - np.eye(d))) > 1e-10:
        raise ValueError("completion must be a unitary matrix")
    if abs(abs(np.vdot(U[:, 0], first)) - 1.0) > 1e-10:
        raise ValueError("first column of the completion must equal the state up to a phase")
    return U


@dataclass(frozen=True, eq=False)
class FlipVectors:
    """``u[a]`` and ``v[a]`` (rows) for the complement vectors ``a = 2..d``."""

    u: np.ndarray
    v: np.ndarray
    psi_basis: np.ndarray
    phi_basis: np.ndarray

    @property
    def u_list(self) -> list[np.ndarray]:
        return list(self.u)

    @property
    def v_list(self) -> list[np.ndarray]:
        return list(self.v)


def flip_vectors(
    state: ProductState,
    basis: BasisSet,
    psi_basis: np.ndarray | None = None,
    phi_basis: np.ndarray | None = None,
) -> FlipVectors:
    """Flip vectors for the default completions, or for explicit ones.

    ``psi_basis`` / ``phi_basis`` are unitaries whose first columns are
    ``psi`` and ``conj(phi)`` up to a phase.
    """
    if state.d != basis.d:
        raise ValueError(f"state has dimension {state.d} but the basis acts on C^{basis.d}")
    U = complement_basis(state.psi) if psi_basis is None else _check_completion(psi_basis, state.psi)
    W = complement_basis(state.phi.conj()) if phi_basis is None else _check_completion(phi_basis, state.phi.conj())
    F = basis.elements
    u = np.einsum("a,kab,bn->nk", U[:, 0].conj(), F, U[:, 1:])
    v = np.einsum("a,kab,bn->nk", W[:, 0].conj(), F, W[:, 1:]) * basis.signs[None, :]
    return FlipVectors(u, v, U, W)


@dataclass(frozen=True, eq=False)
class WitnessMatrix:
    """Hermitian ``2(d-1)`` matrix; indices ``0..d-2`` form the C block, the
    rest the A block."""

    m: np.ndarray
    d: int
    flips: FlipVectors | None = None

    @property
    def block(self) -> int:
        return self.d - 1

    @property
    def c_block(self) -> np.ndarray:
        k = self.block
        return self.m[:k, :k]

    @property
    def a_block(self) -> np.ndarray:
        k = self.block
        return self.m[k:, k:]

    @property
    def cross_block(self) -> np.ndarray:
        k = self.block
        return self.m[:k, k:]

    def psi_vectors(self) -> np.ndarray:
        """Product vectors (columns, in C^{d^2}) matching the rows of ``m``."""
        if self.flips is None:
            raise ValueError("witness matrix carries no state information")
        return _witness_vectors(self.flips)


def _witness_vectors(flips: FlipVectors) -> np.ndarray:
    U, W = flips.psi_basis, flips.phi_basis
    d = U.shape[0]
    cols = [np.kron(U[:, 0], W[:, m]) for m in range(1, d)]
    cols += [np.kron(U[:, n], W[:, 0]) for n in range(1, d)]
    return np.array(cols).T


def _assemble(model: GeneratorModel, flips: FlipVectors) -> np.ndarray:
    k = model.kossakowski
    h12 = model.hamiltonian.h12
    u, v = flips.u, flips.v
    c_blk = v.conj() @ k.C.T @ v.T
    a_blk = u.conj() @ k.A @ u.T
    cross = -(v.conj() @ (k.B.real.T - 1j * h12.T) @ u.T)
    m = np.block([[c_blk, cross], [cross.conj().T, a_blk]])
    return 0.5 * (m + m.conj().T)


def witness_matrix(model: GeneratorModel, state: ProductState, flips: FlipVectors | None = None) -> WitnessMatrix:
    if state.d != model.d:
        raise ValueError(f"state has dimension {state.d} but the model acts on C^{model.d}")
    if flips is None:
        flips = flip_vectors(state, model.basis)
    return WitnessMatrix(_assemble(model, flips), model.d, flips)


def witness_matrix_direct(
    model: GeneratorModel, state: ProductState, conjugated: Superoperator | None = None
) -> np.ndarray:
    """``<Psi_i| L~[Q~] |Psi_j>`` from the full superoperator (independent route)."""
    if conjugated is None:
        conjugated = build_superoperator(partial_transpose_conjugate(model))
    flips = flip_vectors(state, model.basis)
    Phi = _witness_vectors(flips)
    LQ = unvec(conjugated.matrix @ vec(state.transposed_projector()), model.dim)
    return Phi.conj().T @ LQ @ Phi


# --------------------------------------------------------------------------
# principal minors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MinorReport:
    """``index_set`` is 1-based; skipped minors lie inside one diagonal block."""

    index_set: tuple[int, ...]
    value: float
    skipped: bool

    @property
    def order(self) -> int:
        return len(self.index_set)


@lru_cache(maxsize=None)
def _mask_table(d: int):
    size = 2 * (d - 1)
    masks = _kernels.subset_masks(size)
    c_mask = (1 << (d - 1)) - 1
    a_mask = c_mask << (d - 1)
    skipped = np.array([(m & a_mask) == 0 or (m & c_mask) == 0 for m in masks])
    index_sets = tuple(
        tuple(i + 1 for i in range(size) if (int(m) >> i) & 1) for m in masks
    )
    return masks, skipped, index_sets


def principal_minors(wm: WitnessMatrix, include_skipped: bool = True) -> list[MinorReport]:
    """One report per nonempty index subset, ordered by size then lexicographically."""
    masks, skipped, index_sets = _mask_table(wm.d)
    if not include_skipped:
        keep = ~skipped
        masks = masks[keep]
        index_sets = tuple(s for s, k in zip(index_sets, keep) if k)
        skipped = skipped[keep]
    values = _kernels.principal_minors(wm.m, masks)
    return [
        MinorReport(idx, float(val), bool(sk))
        for idx, val, sk in zip(index_sets, values, skipped)
    ]


def _scale(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


def minor_band(report: MinorReport, scale: float, tol_minor: float = TOL_MINOR) -> float:
    """Marginality band for a minor of this order, relative to ``||M||**order``."""
    return tol_minor * scale**report.order


def most_negative_minor(
    wm: WitnessMatrix, tol_minor: float = TOL_MINOR
) -> tuple[MinorReport, float]:
    """Non-skipped minor with the most negative scale-free value ``value / ||M||**order``.

    Returns the report and its scale-free value.
    """
    reports = principal_minors(wm, include_skipped=False)
    s = _scale(wm.m)
    if s == 0.0:
        return reports[0], 0.0
    rel = [r.value / s**r.order for r in reports]
    i = int(np.argmin(rel))
    return reports[i], rel[i]


# --------------------------------------------------------------------------
# verdicts
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FirstOrderVerdict:
    """``kind`` is ``"Entangling"``, ``"NoViolation"`` or ``"Marginal"``.

    ``null_vectors`` holds kernel vectors of ``M`` (columns, in witness-matrix
    coordinates) for the marginal case.
    """

    kind: str
    witness: WitnessMatrix
    minors: list[MinorReport]
    certificate: MinorReport | None = None
    null_vectors: np.ndarray | None = None
    is_cp: bool = True

    @property
    def min_minor(self) -> MinorReport:
        return min(self.minors, key=lambda r: r.value)


def first_order_verdict(
    model: GeneratorModel, state: ProductState, tol_minor: float = TOL_MINOR
) -> FirstOrderVerdict:
    """Classify ``state`` by the signs of the non-skipped principal minors.

    NoViolation only speaks about this state; it does not show that the
    dynamics cannot entangle.
    """
    cp = validate_cp(model.kossakowski)
    if not cp.is_cp:
        warnings.warn(
            f"Kossakowski matrix is not positive semidefinite (min eigenvalue {cp.min_eigenvalue:.3g}); "
            "skipped minors are no longer guaranteed nonnegative",
            RuntimeWarning,
            stacklevel=2,
        )
    return classify(witness_matrix(model, state), tol_minor, cp.is_cp)


def classify(wm: WitnessMatrix, tol_minor: float = TOL_MINOR, is_cp: bool = True) -> FirstOrderVerdict:
    """Verdict from the non-skipped minors of an already assembled witness matrix.

    A minor of order k counts as zero when ``|value| <= tol_minor * ||M||**k``.
    """
    minors = principal_minors(wm, include_skipped=False)
    s = _scale(wm.m)
    negative = [r for r in minors if r.value < -minor_band(r, s, tol_minor)]
    if negative:
        # lowest order first: the smallest submatrix that already certifies
        cert = min(negative, key=lambda r: (r.order, r.value / s**r.order))
        return FirstOrderVerdict("Entangling", wm, minors, certificate=cert, is_cp=is_cp)
    marginal = [r for r in minors if abs(r.value) <= minor_band(r, s, tol_minor)]
    if marginal:
        w, vecs = np.linalg.eigh(wm.m)
        null = vecs[:, w <= tol_minor * max(s, 1e-300)]
        if null.shape[1] == 0:
            null = vecs[:, :1]
        return FirstOrderVerdict(
            "Marginal", wm, minors, certificate=min(marginal, key=lambda r: abs(r.value)),
            null_vectors=null, is_cp=is_cp,
        )
    return FirstOrderVerdict("NoViolation", wm, minors, is_cp=is_cp)


class WitnessContext:
    """Caches the conjugated superoperator of a model for repeated expansions."""

    def __init__(self, model: GeneratorModel):
        self.model = model
        self._conj: Superoperator | None = None

    @property
    def conjugated(self) -> Superoperator:
        if self._conj is None:
            self._conj = build_superoperator(partial_transpose_conjugate(self.model))
        return self._conj

    def powers(self, state: ProductState, kmax: int) -> list[np.ndarray]:
        """``[L~^k [Q~] for k = 0..kmax]``."""
        D = self.model.dim
        x = vec(state.transposed_projector())
        out = [unvec(x, D)]
        S = self.conjugated.matrix
        for _ in range(kmax):
            x = S @ x
            out.append(unvec(x, D))
        return out


def expansion_coefficient(
    model: GeneratorModel,
    state: ProductState,
    phi,
    k: int,
    context: WitnessContext | None = None,
) -> float:
    """``<phi| L~^k [Q~] |phi>``; the small-t term is this value times ``t**k / k!``."""
    if int(k) != k or k < 1:
        raise ValueError(f"expansion order must be a positive integer, got {k!r}")
    phi = np.asarray(phi, dtype=np.complex128).reshape(-1)
    if phi.shape[0] != model.dim:
        raise ValueError(f"phi must have length {model.dim}")
    overlap = np.vdot(phi, state.transposed_projector() @ phi).real
    if abs(overlap) > 1e-10:
        raise ValueError(f"phi is not orthogonal to the transposed projector (<phi|Q~|phi> = {overlap:.3g})")
    ctx = context or WitnessContext(model)
    Lk = ctx.powers(state, int(k))[-1]
    val = np.vdot(phi, Lk @ phi)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ArithmeticError(f"expansion coefficient has imaginary part {val.imag:.3g}")
    return float(val.real)


@dataclass(frozen=True, eq=False)
class Resolution:
    """Outcome of the higher-order analysis of a marginal state.

    ``kind`` is ``"Entangling"``, ``"NoViolation"`` or ``"Undecided"``; ``order``
    is the last expansion order examined and ``coefficients`` maps each
    examined order to the coefficient on ``vector`` (scaled so that its
    largest witness-coordinate component is 1).
    """

    kind: str
    order: int
    coefficients: dict[int, float]
    vector: np.ndarray | None = field(default=None)


def _scaled_direction(c: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(c)))
    return c / c[i]


def resolve_marginal(
    model: GeneratorModel,
    state: ProductState,
    verdict: FirstOrderVerdict | None = None,
    tol: float = TOL_MINOR,
    max_order: int = 3,
    context: WitnessContext | None = None,
) -> Resolution:
    """Decide a marginal state with the k = 2 (then k = 3) expansion terms.

    On the kernel of ``M`` the k-th order quadratic form is compressed to a
    small Hermitian matrix; its lowest eigenvalue is the most negative
    coefficient reachable inside the kernel. Directions where it vanishes
    (within ``tol`` relative to ``||L~^k[Q~]||``) pass to the next order.
    """
    if verdict is None:
        verdict = first_order_verdict(model, state, tol)
    if verdict.kind != "Marginal":
        raise ValueError(f"state is not marginal (verdict {verdict.kind})")
    ctx = context or WitnessContext(model)
    Phi = verdict.witness.psi_vectors()
    basis = Phi @ verdict.null_vectors  # orthonormal columns in C^{d^2}
    coords = verdict.null_vectors
    powers = ctx.powers(state, max_order)
    coefficients: dict[int, float] = {}
    direction = coords[:, 0]
    for k in range(2, max_order + 1):
        Lk = powers[k]
        N = basis.conj().T @ Lk @ basis
        N = 0.5 * (N + N.conj().T)
        w, vecs = np.linalg.eigh(N)
        band = tol * max(float(np.linalg.norm(Lk, 2)), 1e-300)
        direction = _scaled_direction(coords @ vecs[:, 0])
        coefficients[k] = float(np.vdot(Phi @ direction, Lk @ (Phi @ direction)).real)
        if w[0] < -band:
            return Resolution("Entangling", k, coefficients, Phi @ direction)
        flat = np.abs(w) <= band
        if not flat.any():
            return Resolution("NoViolation", k, coefficients, Phi @ direction)
        basis = basis @ vecs[:, flat]
        coords = coords @ vecs[:, flat]
    return Resolution("Undecided", max_order, coefficients, Phi @ direction)


@dataclass(frozen=True, eq=False)
class Assessment:
    """First-order verdict together with the higher-order resolution, if any."""

    first_order: FirstOrderVerdict
    resolution: Resolution | None = None

    @property
    def verdict(self) -> str:
        """Entangling, NoViolation or Undecided."""
        if self.resolution is not None:
            return self.resolution.kind
        return self.first_order.kind


def assess(
    model: GeneratorModel,
    state: ProductState,
    tol_minor: float = TOL_MINOR,
    max_order: int = 3,
    context: WitnessContext | None = None,
) -> Assessment:
    """Run the minor test and, for a marginal state, the expansion up to ``max_order``."""
    fo = first_order_verdict(model, state, tol_minor)
    if fo.kind != "Marginal":
        return Assessment(fo)
    return Assessment(fo, resolve_marginal(model, state, fo, tol_minor, max_order, context))
