"""Acceptance criteria, one ``criterion`` marker per check.

Run ``pytest tests/test_acceptance.py -v`` to get a PASS/FAIL line per
criterion in the terminal summary.
"""
import csv
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from bathent.basis import gellmann_basis, pauli_basis, tensor_pauli_basis
from bathent.cli import main
from bathent.dynamics import negativity_curve
from bathent.generator import (
    GeneratorModel,
    Superoperator,
    build_superoperator,
    choi_matrix,
    partial_transpose_conjugate,
    partial_transpose_superoperator,
    validate_cp,
)
from bathent.models import collective_four_qubit_model, pair_reduction_model, symmetric_dissipation_model
from bathent.search import capability, sample_product_state
from bathent.witness import (
    assess,
    basis_state,
    expansion_coefficient,
    first_order_verdict,
    principal_minors,
    resolve_marginal,
    witness_matrix,
)

from conftest import random_model, random_psd

pytestmark = pytest.mark.acceptance

MODELS = Path(__file__).resolve().parents[1] / "models"
ZERO = basis_state("00", 2)


def _csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---- 1 ---------------------------------------------------------------------------


@pytest.mark.criterion("1")
def test_symmetric_dissipation_threshold():
    start = time.perf_counter()
    phi = np.array([0, 1, 1, 0], dtype=complex)
    expected = {1.0: ("Entangling", 2), 1.2: ("Entangling", 2), 1.5: ("NoViolation", 3), 2.0: ("NoViolation", 2)}
    for x, (kind, order) in expected.items():
        m = symmetric_dissipation_model(x)
        k2 = expansion_coefficient(m, ZERO, phi, 2)
        assert k2 == pytest.approx(16 * x - 24, rel=1e-9, abs=1e-12)
        r = resolve_marginal(m, ZERO)
        assert (r.kind, r.order) == (kind, order), x
    assert time.perf_counter() - start < 1.0


# ---- 2 ---------------------------------------------------------------------------


@pytest.mark.criterion("2")
def test_symmetric_dissipation_oracle(tmp_path):
    start = time.perf_counter()
    model = str(MODELS / "symmetric_dissipation.json")
    out = tmp_path / "x12.csv"
    assert main(["evolve", "--model", model, "--param", "x=1.2", "--state", "00",
                 "--tmax", "0.1", "--steps", "101", "--out", str(out)]) == 0
    assert max(float(r["negativity"]) for r in _csv(out)) > 1e-8
    out = tmp_path / "x2.csv"
    assert main(["evolve", "--model", model, "--param", "x=2", "--state", "00",
                 "--tmax", "0.5", "--steps", "200", "--out", str(out)]) == 0
    table = _csv(out)
    assert len(table) == 200
    assert max(float(r["negativity"]) for r in table) < 1e-8
    assert time.perf_counter() - start < 5.0


# ---- 3 ---------------------------------------------------------------------------


@pytest.mark.criterion("3")
@pytest.mark.parametrize("x", [1.0, 2.0])
def test_conjugated_kossakowski_spectrum(x):
    kt = partial_transpose_conjugate(symmetric_dissipation_model(x)).kossakowski.K
    r2, rx = np.sqrt(2), np.sqrt(1 + x * x)
    want = np.sort([1 + r2, 1 - r2, x + rx, x - rx, 0, 0])
    np.testing.assert_allclose(np.linalg.eigvalsh(kt), want, atol=1e-10)


# ---- 4 ---------------------------------------------------------------------------


def _in_region(x, z):
    a = 1 + z
    return z * z + 9 * x * x <= 1 and a * a > x * x and a * a < 2 * x * x


@pytest.fixture(scope="module")
def region_scan(tmp_path_factory):
    out = tmp_path_factory.mktemp("scan") / "region.csv"
    start = time.perf_counter()
    code = main(["scan", "--model", str(MODELS / "collective_four_qubit.json"),
                 "--scan", str(MODELS / "scan_collective_region.json"), "--out", str(out)])
    assert code == 0
    rows = [(float(r["p1"]), float(r["p2"]), r["is_cp"] == "true", r["verdict"]) for r in _csv(out)]
    return rows, time.perf_counter() - start


def _flagged(rows):
    return [(x, z) for x, z, cp, verdict in rows if cp and verdict == "Entangling"]


@pytest.mark.criterion("4 (as written)")
@pytest.mark.xfail(
    strict=True,
    reason="flagged points also lie outside the three inequalities (order-2 and order-4 minors, "
    "and the line 1+z=2x at second order); the exact evolution confirms every one of them",
)
def test_collective_region_as_written(region_scan):
    rows, _ = region_scan
    outside = [p for p in _flagged(rows) if not _in_region(*p)]
    assert not outside, f"{len(outside)} flagged points outside the inequality region, e.g. {outside[:3]}"


@pytest.mark.criterion("4 (within the inequality region)")
def test_collective_region(region_scan):
    rows, elapsed = region_scan
    assert len(rows) == 35 * 51
    flagged = set(_flagged(rows))
    inside = [(x, z) for x, z, *_ in rows if _in_region(x, z)]
    assert inside and set(inside) <= flagged

    # the pair model alone never entangles where the four-qubit model does by the order-3 minor
    for x, z in inside:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            assert assess(pair_reduction_model(x, z), ZERO).verdict == "NoViolation", (x, z)

    v = first_order_verdict(collective_four_qubit_model(0.2, -0.72), basis_state("0000", 4))
    d3 = 8 * 0.28 * (0.28**2 - 2 * 0.04)
    assert v.kind == "Entangling" and d3 < 0
    assert v.certificate.order == 3
    assert v.certificate.value == pytest.approx(d3, abs=1e-10)

    # every flagged point outside the region is entangled by the exact evolution
    rho0 = basis_state("0000", 4).projector()
    for x, z in flagged - set(inside):
        curve = negativity_curve(collective_four_qubit_model(x, z), rho0, np.linspace(0, 0.2, 11))
        assert curve.negativities.max() > 1e-8, (x, z)
    assert elapsed < 120


# ---- 5 ---------------------------------------------------------------------------


@pytest.mark.criterion("5")
@pytest.mark.parametrize(
    "basis", [pauli_basis(), gellmann_basis(3), gellmann_basis(4), tensor_pauli_basis(2)],
    ids=["pauli", "gellmann3", "gellmann4", "tensor_pauli"],
)
def test_minor_counts(basis, rng):
    d = basis.d
    wm = witness_matrix(random_model(basis, rng), sample_product_state(d, rng))
    count = sum(not r.skipped for r in principal_minors(wm))
    assert count == {2: 1, 3: 9, 4: 49}[d] == 4 ** (d - 1) - 2**d + 1


# ---- 6 ---------------------------------------------------------------------------


@pytest.mark.criterion("6")
def test_capability_closed_form():
    rng = np.random.default_rng(6)
    for _ in range(20):
        h12 = rng.standard_normal((3, 3))
        mu = np.linalg.svd(h12, compute_uv=False)
        r = capability(h12, seed=int(rng.integers(1 << 31)))
        assert r.numerical_max == pytest.approx((mu[0] + mu[1]) ** 2, abs=1e-6)


# ---- 7 ---------------------------------------------------------------------------


def _random_models(rng, count):
    for i in range(count):
        yield random_model(pauli_basis() if i % 2 else gellmann_basis(3), rng)


@pytest.mark.criterion("7a")
def test_conjugation_identity(rng):
    for m in _random_models(rng, 50):
        P = partial_transpose_superoperator(m.d).matrix
        lhs = build_superoperator(partial_transpose_conjugate(m)).matrix
        np.testing.assert_allclose(lhs, P @ build_superoperator(m).matrix @ P, atol=1e-9, rtol=0)


@pytest.mark.criterion("7b")
def test_semigroup_law(rng):
    for m in _random_models(rng, 20):
        L = build_superoperator(m).matrix
        s, t = rng.uniform(0, 1, 2)
        np.testing.assert_allclose(expm((s + t) * L), expm(s * L) @ expm(t * L), atol=1e-9, rtol=0)


def _crafted_models(rng):
    """Ten completely positive and ten non-CP models, including boundary cases."""
    yield symmetric_dissipation_model(1.0), True
    yield symmetric_dissipation_model(2.0), True
    yield symmetric_dissipation_model(0.9), False
    yield collective_four_qubit_model(0.2, -0.72), True
    yield collective_four_qubit_model(0.3, -0.72), False
    yield pair_reduction_model(0.2, -0.72), True
    for basis in (pauli_basis(), gellmann_basis(3)):
        n = basis.size
        for rank in (1, n, 2 * n):
            k = random_psd(2 * n, rng, rank)
            yield GeneratorModel.from_arrays(basis, k[:n, :n], k[:n, n:], k[n:, n:], h12=rng.standard_normal((n, n))), True
        for gap in (1e-2, 0.1, 0.5, 1.0):
            k = random_psd(2 * n, rng)
            w, U = np.linalg.eigh(k)
            w[0] = -gap
            k = (U * w) @ U.conj().T
            yield GeneratorModel.from_arrays(basis, k[:n, :n], k[:n, n:], k[n:, n:]), False


@pytest.mark.criterion("7c")
def test_cp_matches_small_time_choi_positivity(rng):
    models = list(_crafted_models(rng))
    assert len(models) == 20 and sum(cp for _, cp in models) == 10
    t = 1e-3
    for m, cp in models:
        assert validate_cp(m.kossakowski).is_cp == cp
        prop = Superoperator(m.dim, expm(t * build_superoperator(m).matrix))
        choi_min = np.linalg.eigvalsh(choi_matrix(prop))[0]
        assert (choi_min > -1e-10) == cp, (cp, choi_min)


@pytest.mark.criterion("7d")
def test_witness_oracle_sign_agreement(rng):
    """First-order verdicts against the exact evolution on the first-order time scale.

    The PT expectation along the worst witness direction is
    ``t * lambda_min(M) + O(t**2 * ||L~||**2)``, so the check runs up to
    ``tau = |lambda_min(M)| / (2 ||L~||_2**2)`` (capped at 0.05), where the
    first-order term dominates.
    """
    kinds = {"Entangling": 0, "NoViolation": 0}
    for _ in range(100):
        m = random_model(pauli_basis(), rng)
        s = sample_product_state(2, rng)
        v = first_order_verdict(m, s)
        assert v.kind in kinds
        kinds[v.kind] += 1
        lam = np.linalg.eigvalsh(v.witness.m)[0]
        norm = np.linalg.norm(build_superoperator(partial_transpose_conjugate(m)).matrix, 2)
        tau = min(0.05, abs(lam) / (2 * norm**2))
        curve = negativity_curve(m, s.projector(), np.linspace(0, tau, 21))
        if v.kind == "Entangling":
            assert curve.negativities.max() > 1e-8
        else:
            assert curve.min_pt_eigenvalues.min() >= -1e-8
    assert min(kinds.values()) > 10
