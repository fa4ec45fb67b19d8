"""Searches over product states: entangling certificates and Hamiltonian capability.

States are parametrized in a fixed gauge: each factor is
``(cos a_1, sin a_1 cos a_2 e^{i p_1}, ...)`` with hyperspherical angles
``a`` and relative phases ``p``, so a d-level factor has ``2(d-1)`` real
coordinates and its first component is real and nonnegative. Local
refinement is a coordinate-wise bounded Brent line search (derivative-free).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .basis import BasisSet, gellmann_basis, pauli_basis
from .generator import GeneratorModel
from .witness import (
    TOL_MINOR,
    MinorReport,
    ProductState,
    first_order_verdict,
    flip_vectors,
    principal_minors,
    witness_matrix,
)

__all__ = [
    "CERTIFICATE_FOUND",
    "NO_VIOLATION_FOUND",
    "SearchReport",
    "CapabilityReport",
    "sample_product_state",
    "state_from_angles",
    "angles_from_state",
    "refine",
    "polish",
    "find_entangling_state",
    "capability",
    "hamiltonian_condition",
]

CERTIFICATE_FOUND = "CertificateFound"
NO_VIOLATION_FOUND = "NoViolationFound"


def sample_product_state(d: int, seed) -> ProductState:
    """Haar-random product state (normalized complex Gaussian factors)."""
    if int(d) != d or d < 2:
        raise ValueError(f"local dimension must be an integer >= 2, got {d!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.standard_normal((2, int(d))) + 1j * rng.standard_normal((2, int(d)))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return ProductState(z[0], z[1])


# --------------------------------------------------------------------------
# gauge-fixed parametrization
# --------------------------------------------------------------------------


def _vector_from_angles(theta: np.ndarray, d: int) -> np.ndarray:
    a, p = theta[: d - 1], theta[d - 1 :]
    mag = np.ones(d)
    s = 1.0
    for k in range(d - 1):
        mag[k] = s * np.cos(a[k])
        s *= np.sin(a[k])
    mag[d - 1] = s
    out = mag.astype(np.complex128)
    out[1:] *= np.exp(1j * p)
    return out


def _angles_from_vector(x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    x = x / np.linalg.norm(x)
    # the global phase is dropped; only phases relative to x[0] survive
    if abs(x[0]) > 1e-14:
        x = x * np.exp(-1j * np.angle(x[0]))
    mag = np.abs(x)
    a = np.empty(d - 1)
    for k in range(d - 1):
        tail = np.linalg.norm(mag[k:])
        a[k] = np.arccos(np.clip(mag[k] / tail, -1.0, 1.0)) if tail > 0 else 0.0
    p = np.angle(x[1:])
    return np.concatenate([a, p])


def state_from_angles(theta, d: int) -> ProductState:
    theta = np.asarray(theta, dtype=np.float64)
    n = 2 * (d - 1)
    return ProductState(_vector_from_angles(theta[:n], d), _vector_from_angles(theta[n:], d))


def angles_from_state(state: ProductState) -> np.ndarray:
    return np.concatenate([_angles_from_vector(state.psi), _angles_from_vector(state.phi)])


def refine(fun, x0, sweeps: int = 6, width: float = np.pi / 2, xatol: float = 1e-10):
    """Coordinate-wise bounded line search; returns ``(x, f(x), evaluations)``.

    Each sweep minimizes along every coordinate in ``[x_i - w, x_i + w]``,
    halving ``w`` after a sweep that gains less than 1e-12.
    """
    x = np.array(x0, dtype=np.float64)
    fx = fun(x)
    nev = 1
    w = width
    for _ in range(sweeps):
        start = fx
        for i in range(x.size):
            xi = x[i]

            def line(s, i=i):
                y = x.copy()
                y[i] = s
                return fun(y)

            res = minimize_scalar(line, bounds=(xi - w, xi + w), method="bounded", options={"xatol": xatol})
            nev += res.nfev
            if res.fun < fx:
                x[i], fx = res.x, float(res.fun)
        if start - fx < 1e-12:
            w *= 0.5
    return x, fx, nev


def polish(fun, x0, xtol: float = 1e-12):
    """Powell's conjugate-direction search from ``x0``; handles the coupled
    directions that pure coordinate sweeps creep along."""
    res = minimize(fun, x0, method="Powell", options={"xtol": xtol, "ftol": 1e-15, "maxfev": 20000})
    return np.asarray(res.x), float(res.fun), int(res.nfev)


# --------------------------------------------------------------------------
# entangling-state search
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SearchReport:
    """Best state found and its most negative non-skipped minor.

    ``NoViolationFound`` is heuristic evidence only: it records the minimum
    reached within ``evaluations`` objective calls and proves nothing about
    states that were not visited.
    """

    best_state: ProductState
    best_minor: MinorReport
    evaluations: int
    verdict: str
    budget: int
    seed: int | None


def _worst_minor(model: GeneratorModel, state: ProductState) -> MinorReport:
    reports = principal_minors(witness_matrix(model, state), include_skipped=False)
    return min(reports, key=lambda r: r.value)


def find_entangling_state(
    model: GeneratorModel, budget: int, seed=0, tol_minor: float = TOL_MINOR, sweeps: int = 4
) -> SearchReport:
    """Multistart descent on the most negative non-skipped principal minor.

    ``budget`` random starts are drawn from ``default_rng(seed)``; each is
    refined and the search stops at the first state whose first-order verdict
    is Entangling. Starts are processed in order and ties keep the earlier
    start, so the report depends only on the inputs.
    """
    if int(budget) != budget or budget < 1:
        raise ValueError(f"budget must be a positive integer, got {budget!r}")
    d = model.d
    rng = np.random.default_rng(seed)
    nev = 0

    def objective(theta):
        return _worst_minor(model, state_from_angles(theta, d)).value

    best_theta, best_val = None, np.inf
    for _ in range(int(budget)):
        start = sample_product_state(d, rng)
        theta0 = angles_from_state(start)
        theta, val, n = refine(objective, theta0, sweeps=sweeps)
        nev += n
        if val < best_val:
            best_theta, best_val = theta, val
            state = state_from_angles(best_theta, d)
            if first_order_verdict(model, state, tol_minor).kind == "Entangling":
                break
    state = state_from_angles(best_theta, d).canonical()
    certified = first_order_verdict(model, state, tol_minor).kind == "Entangling"
    return SearchReport(
        best_state=state,
        best_minor=_worst_minor(model, state),
        evaluations=nev,
        verdict=CERTIFICATE_FOUND if certified else NO_VIOLATION_FOUND,
        budget=int(budget),
        seed=seed if isinstance(seed, (int, np.integer)) else None,
    )


# --------------------------------------------------------------------------
# Hamiltonian entangling capability
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CapabilityReport:
    """``eta_max`` is the closed form for qubits and the numerical maximum otherwise."""

    singular_values: np.ndarray
    eta_max: float
    maximizer: ProductState
    numerical_max: float
    closed_form: bool


def hamiltonian_condition(h12: np.ndarray, state: ProductState, basis: BasisSet) -> float:
    """Largest ``|<u|h12|v>|**2`` over the complement vectors of ``state``.

    For qubits there is a single pair ``(u, v)``.
    """
    f = flip_vectors(state, basis)
    g = f.u.conj() @ h12 @ f.v.T
    return float(np.linalg.norm(g, 2) ** 2)


def _basis_for(n: int) -> BasisSet:
    d = int(round(np.sqrt(n + 1)))
    if d * d - 1 != n:
        raise ValueError(f"h12 must be (d^2-1) x (d^2-1); got {n} x {n}")
    return pauli_basis() if d == 2 else gellmann_basis(d)


def capability(
    h12, basis: BasisSet | None = None, starts: int = 8, seed=0, sweeps: int = 8
) -> CapabilityReport:
    """Maximal value of the Hamiltonian entangling condition ``|<u|h12|v>|**2``.

    For qubits in the Pauli basis the maximum is ``(mu_1 + mu_2)**2`` with
    ``mu`` the singular values of ``h12``; the search is run anyway to return a
    maximizing state.
    """
    h = np.asarray(h12)
    if np.iscomplexobj(h):
        if np.any(h.imag != 0):
            raise ValueError("h12 must be real")
        h = h.real
    h = np.array(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"h12 must be a square matrix, got shape {h.shape}")
    if basis is None:
        basis = _basis_for(h.shape[0])
    elif basis.size != h.shape[0]:
        raise ValueError(f"h12 is {h.shape[0]} square but the basis has {basis.size} elements")
    mu = np.linalg.svd(h, compute_uv=False)
    d = basis.d
    rng = np.random.default_rng(seed)

    def objective(theta):
        return -hamiltonian_condition(h, state_from_angles(theta, d), basis)

    best_theta, best_val = None, np.inf
    for _ in range(starts):
        theta, val, _ = refine(objective, angles_from_state(sample_product_state(d, rng)), sweeps=sweeps)
        if val < best_val:
            best_theta, best_val = theta, val
    best_theta, _, _ = polish(objective, best_theta)
    maximizer = state_from_angles(best_theta, d).canonical()
    numeric = hamiltonian_condition(h, maximizer, basis)
    closed = d == 2 and basis.kind == "pauli"
    eta = float((mu[0] + mu[1]) ** 2) if closed else numeric
    return CapabilityReport(mu, eta, maximizer, numeric, closed)
