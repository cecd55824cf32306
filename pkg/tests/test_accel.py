import json
import os
import subprocess
import sys

import numpy as np
import pytest

from cohsmooth import _accel, _kernels, _oracle, _smooth, _tdc
from cohsmooth.states import random_density


def test_backend_reports_flag():
    assert _accel.backend() == ("numba" if _accel.NUMBA_ENABLED else "numpy")


def test_flag_parsing(monkeypatch):
    for value, expected in (("", True), ("0", True), ("1", False), ("yes", False), ("off", True)):
        monkeypatch.setenv(_accel.DISABLE_FLAG, value)
        assert _accel._requested() is expected


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_kernel_parity(seed):
    rho = np.ascontiguousarray(random_density(4, seed=seed).matrix)
    sig = np.ascontiguousarray(random_density(4, seed=seed + 10).matrix)
    w1, v1, _ = _kernels.jacobi_eigh(rho, 1e-14, 100)
    w2, v2, _ = _kernels.jacobi_eigh.py_func(rho, 1e-14, 100)
    assert np.allclose(w1, w2, atol=1e-13)
    a = _kernels.relative_entropy(rho, sig, 1e-12)
    b = _kernels.relative_entropy.py_func(rho, sig, 1e-12)
    assert a == pytest.approx(b, abs=1e-12)
    x1 = _tdc.tdc_subgradient(rho, np.full(4, 0.25), 50, 0.5)
    x2 = _tdc.tdc_subgradient.py_func(rho, np.full(4, 0.25), 50, 0.5)
    assert x1[1] == pytest.approx(x2[1], abs=1e-10)


@pytest.mark.parametrize("dist,measure", [(0, 0), (0, 1), (1, 1)])
def test_grid_sweep_variants_agree(dist, measure):
    v = np.array([0.3, -0.2, 0.5])
    a = _oracle.grid_sweep_numba(v, 0.15, dist, measure, 41)
    b = _oracle.grid_sweep_numba.py_func(v, 0.15, dist, measure, 41)
    c = _oracle.grid_sweep_numpy(v, 0.15, dist, measure, 41)
    assert a[0] == b[0] == c[0]
    assert a[1] == pytest.approx(b[1], abs=1e-12) and a[1] == pytest.approx(c[1], abs=1e-12)
    assert a[3] == pytest.approx(c[3], abs=1e-12)


def test_lagrangian_parity():
    rho = np.ascontiguousarray(random_density(3, seed=5).matrix)
    d0 = np.real(np.diag(rho)).copy()
    mus = np.array([1e-3, 1e-4])
    args = (rho, rho.copy(), d0, 2.0, mus, 50, 0, 0, 0.0, 0.0, 1e-6)
    a = _smooth.lagrangian_solve(*args)
    b = _smooth.lagrangian_solve.py_func(*args)
    for x, y in zip(a, b):
        assert np.allclose(x, y, atol=1e-9)


def test_pure_numpy_path_in_subprocess(tmp_path):
    code = (
        "import json, numpy as np\n"
        "from cohsmooth import NUMBA_ENABLED, measures, smoothing, states\n"
        "rho = states.random_density(2, seed=3)\n"
        "r = smoothing.smooth_min(rho, ('trace', 0.1), 'l1',"
        " smoothing.SmoothConfig(oracle_resolution=41))\n"
        "print(json.dumps([NUMBA_ENABLED, measures.c_rel_ent(rho), r.value]))\n"
    )
    env = dict(os.environ, COHSMOOTH_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True, timeout=600)
    enabled, cre, val = json.loads(out.stdout)
    assert enabled is False
    from cohsmooth import measures, smoothing, states

    rho = states.random_density(2, seed=3)
    assert cre == pytest.approx(measures.c_rel_ent(rho), abs=1e-12)
    ref = smoothing.smooth_min(rho, ("trace", 0.1), "l1", smoothing.SmoothConfig(oracle_resolution=41))
    assert val == pytest.approx(ref.value, abs=1e-9)
