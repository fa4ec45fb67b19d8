"""Brute-force semigroup evolution, partial transposes and negativity.

This is the ground truth the witness verdicts are checked against. Evolved
states are never renormalized; if the trace or Hermiticity drifts beyond
``TOL_EVOLVE`` a :class:`ToleranceBreach` is raised.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .generator import GeneratorModel, Superoperator, build_superoperator, unvec, vec

__all__ = [
    "TOL_NEG",
    "TOL_EVOLVE",
    "ToleranceBreach",
    "check_density_matrix",
    "propagator",
    "evolve",
    "partial_transpose",
    "pt_min_eigenvalue",
    "negativity",
    "NegativityCurve",
    "negativity_curve",
    "Onset",
    "NoneFound",
    "entanglement_onset",
]

TOL_NEG = 1e-8
TOL_EVOLVE = 1e-9
_TOL_STATE = 1e-10


class ToleranceBreach(ArithmeticError):
    """Evolution drifted away from a valid density matrix."""


def check_density_matrix(rho: np.ndarray, tol: float = _TOL_STATE) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix has trace {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def propagator(superop: Superoperator, t: float) -> np.ndarray:
    """``exp(t L)`` as a matrix on column-stacked operators."""
    if not t >= 0:
        raise ValueError(f"evolution time must be nonnegative, got {t!r}")
    if t == 0:
        return np.eye(superop.matrix.shape[0], dtype=np.complex128)
    with np.errstate(over="ignore", invalid="ignore"):
        out = expm(t * superop.matrix)
    if not np.all(np.isfinite(out)):
        raise ToleranceBreach(f"matrix exponential is not finite at t = {t}")
    return out


def _checked(rho: np.ndarray, t: float) -> np.ndarray:
    tr_err = abs(np.trace(rho) - 1.0)
    herm_err = float(np.max(np.abs(rho - rho.conj().T)))
    if tr_err > TOL_EVOLVE or herm_err > TOL_EVOLVE:
        raise ToleranceBreach(
            f"evolved state at t = {t} drifted (trace error {tr_err:.3g}, Hermiticity error {herm_err:.3g})"
        )
    return rho


def evolve(superop: Superoperator, rho0: np.ndarray, t: float) -> np.ndarray:
    """``exp(t L)[rho0]``, without renormalization."""
    rho0 = check_density_matrix(rho0)
    if rho0.shape[0] != superop.dim:
        raise ValueError(f"state has dimension {rho0.shape[0]}, generator acts on {superop.dim}")
    if t == 0:
        return rho0.copy()
    rho = unvec(propagator(superop, t) @ vec(rho0), superop.dim)
    return _checked(rho, t)


def partial_transpose(rho: np.ndarray, d: int) -> np.ndarray:
    """Transpose the second tensor factor of a ``d^2 x d^2`` matrix."""
    rho = np.asarray(rho)
    D = d * d
    if rho.shape != (D, D):
        raise ValueError(f"expected a {D}x{D} matrix for d = {d}, got {rho.shape}")
    return rho.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(D, D)


def _pt_eigenvalues(rho: np.ndarray, d: int) -> np.ndarray:
    pt = partial_transpose(rho, d)
    return np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))


def pt_min_eigenvalue(rho: np.ndarray, d: int) -> float:
    return float(_pt_eigenvalues(rho, d)[0])


def negativity(rho: np.ndarray, d: int) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose.

    For two qubits this is positive exactly for entangled states. For ``d >= 3``
    a positive value proves entanglement but zero does not prove separability.
    """
    w = _pt_eigenvalues(rho, d)
    return float(0.0 - w[w < 0].sum())


@dataclass(frozen=True, eq=False)
class NegativityCurve:
    times: np.ndarray
    negativities: np.ndarray
    min_pt_eigenvalues: np.ndarray
    trace_errors: np.ndarray


def _as_model_superop(model_or_superop) -> Superoperator:
    if isinstance(model_or_superop, GeneratorModel):
        return build_superoperator(model_or_superop)
    return model_or_superop


def _validate_grid(times) -> np.ndarray:
    t = np.asarray(times, dtype=np.float64).reshape(-1)
    if t.size == 0:
        raise ValueError("time grid is empty")
    if not np.all(np.isfinite(t)) or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be finite, nonnegative and strictly increasing")
    return t


def negativity_curve(model_or_superop, rho0: np.ndarray, times) -> NegativityCurve:
    """Evolve along ``times`` and record negativity, PT minimum and trace error.

    A uniform grid reuses one propagator step; otherwise each point is
    exponentiated directly.
    """
    S = _as_model_superop(model_or_superop)
    t = _validate_grid(times)
    rho0 = check_density_matrix(rho0)
    d = int(round(np.sqrt(S.dim)))
    steps = np.diff(t)
    uniform = t.size > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=0)
    neg = np.empty(t.size)
    lo = np.empty(t.size)
    terr = np.empty(t.size)
    x = vec(rho0)
    if uniform:
        x = propagator(S, t[0]) @ x
        step = propagator(S, steps[0])
    for i, ti in enumerate(t):
        if uniform:
            if i:
                x = step @ x
            rho = unvec(x, S.dim)
        else:
            rho = unvec(propagator(S, ti) @ vec(rho0), S.dim)
        rho = _checked(rho, ti)
        w = _pt_eigenvalues(rho, d)
        neg[i] = 0.0 - w[w < 0].sum()
        lo[i] = w[0]
        terr[i] = abs(np.trace(rho) - 1.0)
    return NegativityCurve(t, neg, lo, terr)


@dataclass(frozen=True)
class Onset:
    t: float
    negativity: float


@dataclass(frozen=True)
class NoneFound:
    t_max: float


def entanglement_onset(
    model_or_superop,
    state,
    t_grid,
    tol_neg: float = TOL_NEG,
    rtol: float = 1e-3,
) -> Onset | NoneFound:
    """First time the evolved product state has negativity above ``tol_neg``.

    The first grid point past the threshold is refined by bisection on the
    sign of ``min PT eigenvalue + tol_neg`` until the bracket is narrower than
    ``rtol`` times its upper end.
    """
    S = _as_model_superop(model_or_superop)
    t = _validate_grid(t_grid)
    rho0 = state.projector() if hasattr(state, "projector") else np.asarray(state)
    d = int(round(np.sqrt(S.dim)))
    curve = negativity_curve(S, rho0, t)
    hits = np.flatnonzero(curve.negativities > tol_neg)
    if hits.size == 0:
        return NoneFound(float(t[-1]))
    i = int(hits[0])
    if i == 0:
        return Onset(float(t[0]), float(curve.negativities[0]))

    def entangled(s: float) -> bool:
        return pt_min_eigenvalue(evolve(S, rho0, s), d) + tol_neg < 0

    lo, hi = float(t[i - 1]), float(t[i])
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if entangled(mid):
            hi = mid
        else:
            lo = mid
    return Onset(hi, negativity(evolve(S, rho0, hi), d))
