import numpy as np
import pytest

from bathent import _kernels
from bathent.basis import pauli_basis
from bathent.generator import GeneratorModel


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run a test once per kernel implementation."""
    if request.param == "numba" and not _kernels.NUMBA_AVAILABLE:
        pytest.skip("numba is not installed")
    monkeypatch.setattr(_kernels, "USE_NUMBA", request.param == "numba")
    return request.param


def random_psd(n, rng, rank=None, scale=1.0):
    rank = n if rank is None else rank
    x = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    k = x @ x.conj().T
    return scale * k / np.linalg.norm(k, 2)


def random_model(basis, rng, hamiltonian=1.0, rank=None):
    """Unit-scale model: ``||K||_2 = 1`` and Hamiltonian coefficients in [-h, h]."""
    n = basis.size
    k = random_psd(2 * n, rng, rank)
    h = hamiltonian
    return GeneratorModel.from_arrays(
        basis,
        k[:n, :n],
        k[:n, n:],
        k[n:, n:],
        h * rng.uniform(-1, 1, n),
        h * rng.uniform(-1, 1, n),
        h * rng.uniform(-1, 1, (n, n)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def qubits():
    return pauli_basis()


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion
# ---------------------------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    label = marker.args[0]
    xfail = item.get_closest_marker("xfail")
    passed = call.excinfo is None
    note = ""
    if not passed:
        note = xfail.kwargs.get("reason", "") if xfail is not None else str(call.excinfo.value).splitlines()[0]
    elif xfail is not None:
        note = "unexpectedly passed"
    _CRITERIA.setdefault(label, []).append((item.name, passed, note))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: (len(s.split()[0]), s)):
        results = _CRITERIA[label]
        ok = all(p for _, p, _ in results)
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'}"
        notes = [n for _, p, n in results if n]
        if notes:
            line += " -- " + "; ".join(notes)
        terminalreporter.write_line(line)
