#!/usr/bin/env python3
"""Compiled vs pure-numpy timings of the hot kernels.

Every kernel is timed three ways where possible: the numba build, the same
function through ``.py_func`` (interpreted), and for the Bloch grid sweep the
vectorized numpy variant that ``COHSMOOTH_DISABLE_NUMBA=1`` selects.  The
first compiled call (JIT or cache load) is reported separately.

    python3 benchmarks/bench_kernels.py [--repeat N] [--quick]
"""
import argparse
import time

import numpy as np

from cohsmooth import NUMBA_ENABLED, _kernels, _oracle, _smooth
from cohsmooth.oneshot import OperationFamily, family_sweep
from cohsmooth.states import maximally_coherent, random_density


def timeit(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def row(name, compiled, interpreted, numpy_variant=None):
    cells = [f"{name:<28}", f"{compiled * 1e3:>11.3f}", f"{interpreted * 1e3:>13.3f}"]
    cells.append(f"{numpy_variant * 1e3:>11.3f}" if numpy_variant is not None else f"{'-':>11}")
    cells.append(f"{interpreted / compiled:>8.1f}x")
    print("  ".join(cells))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args()
    if not NUMBA_ENABLED:
        print("numba disabled (COHSMOOTH_DISABLE_NUMBA set); both columns run interpreted")

    rho3 = np.ascontiguousarray(random_density(3, seed=1).matrix)
    rho4 = np.ascontiguousarray(random_density(4, seed=2).matrix)
    v = np.array([0.4, 0.2, 0.3])
    res = 61 if args.quick else 121

    print(f"{'kernel':<28}  {'numba [ms]':>11}  {'py_func [ms]':>13}  {'numpy [ms]':>11}  {'speedup':>9}")

    t0 = time.perf_counter()
    _kernels.jacobi_eigh(rho4, 1e-14, 100)
    print(f"(first compiled call incl. JIT/cache load: {time.perf_counter() - t0:.3f} s)")

    tc, _ = timeit(lambda: [_kernels.jacobi_eigh(rho4, 1e-14, 100) for _ in range(200)], args.repeat)
    ti, _ = timeit(lambda: [_kernels.jacobi_eigh.py_func(rho4, 1e-14, 100) for _ in range(200)],
                   args.repeat)
    tn, _ = timeit(lambda: [np.linalg.eigh(rho4) for _ in range(200)], args.repeat)
    row("jacobi_eigh d=4 (x200)", tc, ti, tn)

    sig4 = np.ascontiguousarray(random_density(4, seed=3).matrix)
    tc, _ = timeit(lambda: [_kernels.relative_entropy(rho4, sig4, 1e-12)
                            for _ in range(200)], args.repeat)
    ti, _ = timeit(lambda: [_kernels.relative_entropy.py_func(rho4, sig4, 1e-12)
                            for _ in range(200)], args.repeat)
    row("relative_entropy d=4 (x200)", tc, ti)

    eps = 0.5
    for meas, name in ((0, "l1"), (1, "relent")):
        tc, a = timeit(lambda: _oracle.grid_sweep_numba(v, eps, 0, meas, res), args.repeat)
        ti, b = timeit(lambda: _oracle.grid_sweep_numba.py_func(v, eps, 0, meas, res), 1)
        tn, c = timeit(lambda: _oracle.grid_sweep_numpy(v, eps, 0, meas, res), args.repeat)
        assert abs(a[1] - b[1]) < 1e-12 and abs(a[1] - c[1]) < 1e-12, (a[1], b[1], c[1])
        row(f"bloch grid {name} r={res}", tc, ti, tn)

    x0 = rho3.copy()
    d0 = np.real(np.diag(rho3)).copy()
    mus = np.array([1e-3, 1e-4])
    tc, _ = timeit(lambda: _smooth.lagrangian_solve(rho3, x0, d0, 2.0, mus, 100, 0, 0, 0.0, 0.0, 1e-6),
                   args.repeat)
    ti, _ = timeit(lambda: _smooth.lagrangian_solve.py_func(rho3, x0, d0, 2.0, mus, 100, 0, 0, 0.0,
                                                            0.0, 1e-6), 1)
    row("lagrangian_solve d=3 l1", tc, ti)

    fam = OperationFamily(2)
    targets = np.ascontiguousarray(np.array([maximally_coherent(2).to_density().matrix]))
    inputs = np.ascontiguousarray(np.array([random_density(2, seed=5).matrix]))
    call = (fam.codes, fam.us, fam.params, fam.deltas, fam.first, fam.second, inputs, targets, 0, True)
    tc, _ = timeit(lambda: family_sweep(*call), args.repeat)
    ti, _ = timeit(lambda: family_sweep.py_func(*call), 1)
    row(f"family_sweep d=2 ({len(fam)})", tc, ti)


if __name__ == "__main__":
    main()
