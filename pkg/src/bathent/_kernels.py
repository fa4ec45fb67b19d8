"""Hot numeric kernels with a numba path and a pure-numpy path.

The numba path is used when numba imports cleanly and the environment
variable ``BATHENT_DISABLE_NUMBA`` is unset (or ``0``/``false``). Both paths
are always importable as ``*_numpy`` / ``*_numba`` so tests can compare them;
``*_numba`` is ``None`` when numba is unavailable.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = [
    "USE_NUMBA",
    "NUMBA_AVAILABLE",
    "subset_masks",
    "principal_minors",
    "principal_minors_numpy",
    "principal_minors_numba",
    "sandwich_superoperator",
    "sandwich_superoperator_numpy",
    "sandwich_superoperator_numba",
]


def _flag_disabled() -> bool:
    return os.environ.get("BATHENT_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _flag_disabled()


def subset_masks(size: int) -> np.ndarray:
    """All nonempty subsets of ``range(size)`` as bitmasks, ordered by subset
    size and then lexicographically by index tuple."""
    from itertools import combinations

    masks = []
    for k in range(1, size + 1):
        for combo in combinations(range(size), k):
            m = 0
            for i in combo:
                m |= 1 << i
            masks.append(m)
    return np.array(masks, dtype=np.int64)


# --------------------------------------------------------------------------
# principal minors
# --------------------------------------------------------------------------


def principal_minors_numpy(m: np.ndarray, masks: np.ndarray) -> np.ndarray:
    m = np.ascontiguousarray(m, dtype=np.complex128)
    size = m.shape[0]
    out = np.empty(len(masks), dtype=np.float64)
    bits = ((masks[:, None] >> np.arange(size)) & 1).astype(bool)
    orders = bits.sum(axis=1)
    for k in np.unique(orders):
        sel = np.nonzero(orders == k)[0]
        idx = np.nonzero(bits[sel])[1].reshape(len(sel), k)
        sub = m[idx[:, :, None], idx[:, None, :]]
        out[sel] = np.linalg.det(sub).real
    return out


def _principal_minors_py(m, masks):
    size = m.shape[0]
    out = np.empty(masks.shape[0], dtype=np.float64)
    idx = np.empty(size, dtype=np.int64)
    work = np.empty((size, size), dtype=np.complex128)
    for t in range(masks.shape[0]):
        mask = masks[t]
        k = 0
        for i in range(size):
            if (mask >> i) & 1:
                idx[k] = i
                k += 1
        for a in range(k):
            for b in range(k):
                work[a, b] = m[idx[a], idx[b]]
        det = 1.0 + 0.0j
        for c in range(k):
            p = c
            best = abs(work[c, c])
            for r in range(c + 1, k):
                if abs(work[r, c]) > best:
                    best = abs(work[r, c])
                    p = r
            if best == 0.0:
                det = 0.0 + 0.0j
                break
            if p != c:
                for j in range(k):
                    tmp = work[c, j]
                    work[c, j] = work[p, j]
                    work[p, j] = tmp
                det = -det
            piv = work[c, c]
            det *= piv
            for r in range(c + 1, k):
                f = work[r, c] / piv
                if f != 0.0:
                    for j in range(c, k):
                        work[r, j] -= f * work[c, j]
        out[t] = det.real
    return out


# --------------------------------------------------------------------------
# sandwich part of a Lindblad superoperator:  sum_ab K_ab vec(G_a X G_b)
# column-stacking: vec(A X B) = (B^T kron A) vec(X)
# --------------------------------------------------------------------------


def sandwich_superoperator_numpy(K: np.ndarray, G: np.ndarray) -> np.ndarray:
    D = G.shape[1]
    T = np.einsum("ab,aij->bij", K, G)
    return np.einsum("bji,bkl->ikjl", G, T).reshape(D * D, D * D)


def _sandwich_py(K, G):
    n, D, _ = G.shape
    T = np.zeros((n, D, D), dtype=np.complex128)
    for a in range(n):
        for b in range(n):
            kab = K[a, b]
            if kab != 0.0:
                for i in range(D):
                    for j in range(D):
                        T[b, i, j] += kab * G[a, i, j]
    out = np.zeros((D * D, D * D), dtype=np.complex128)
    for b in range(n):
        for i in range(D):
            for j in range(D):
                g = G[b, j, i]
                if g != 0.0:
                    for k in range(D):
                        for l in range(D):
                            out[i * D + k, j * D + l] += g * T[b, k, l]
    return out


if NUMBA_AVAILABLE:
    principal_minors_numba = numba.njit(cache=True)(_principal_minors_py)
    sandwich_superoperator_numba = numba.njit(cache=True)(_sandwich_py)
else:  # pragma: no cover
    principal_minors_numba = None
    sandwich_superoperator_numba = None


def principal_minors(m: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Real parts of the principal minors of Hermitian ``m`` selected by ``masks``."""
    m = np.ascontiguousarray(m, dtype=np.complex128)
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    if USE_NUMBA:
        return principal_minors_numba(m, masks)
    return principal_minors_numpy(m, masks)


def sandwich_superoperator(K: np.ndarray, G: np.ndarray) -> np.ndarray:
    K = np.ascontiguousarray(K, dtype=np.complex128)
    G = np.ascontiguousarray(G, dtype=np.complex128)
    if USE_NUMBA:
        return sandwich_superoperator_numba(K, G)
    return sandwich_superoperator_numpy(K, G)
