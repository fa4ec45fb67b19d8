"""Compare the numba and numpy kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints the median wall time per call for each kernel and problem size. The
first numba call (compilation, or loading the on-disk cache) is excluded.
"""
import argparse
import timeit

import numpy as np

from bathent import _kernels
from bathent.basis import gellmann_basis, tensor_pauli_basis
from bathent.generator import local_operators


def _psd(n, rng):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return x @ x.conj().T


def _time(fn, args, repeat):
    fn(*args)
    runs = timeit.repeat(lambda: fn(*args), number=1, repeat=repeat)
    return float(np.median(runs))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args(argv)
    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed")
    rng = np.random.default_rng(0)

    cases = []
    for name, basis in [("d=3", gellmann_basis(3)), ("d=4", tensor_pauli_basis(2)), ("d=5", gellmann_basis(5))]:
        G = np.ascontiguousarray(local_operators(basis), dtype=np.complex128)
        K = _psd(G.shape[0], rng)
        cases.append(("sandwich", name, _kernels.sandwich_superoperator_numpy,
                      _kernels.sandwich_superoperator_numba, (K, G)))
    for d in (3, 4, 5):
        size = 2 * (d - 1)
        m = _psd(size, rng)
        masks = _kernels.subset_masks(size)
        cases.append(("minors", f"d={d}", _kernels.principal_minors_numpy,
                      _kernels.principal_minors_numba, (m, masks)))

    print(f"{'kernel':<10}{'size':<6}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}")
    for kernel, size, f_np, f_nb, fargs in cases:
        np.testing.assert_allclose(f_np(*fargs), f_nb(*fargs), rtol=1e-9, atol=1e-9)
        t_np = _time(f_np, fargs, args.repeat)
        t_nb = _time(f_nb, fargs, args.repeat)
        print(f"{kernel:<10}{size:<6}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>9.1f}")


if __name__ == "__main__":
    main()
