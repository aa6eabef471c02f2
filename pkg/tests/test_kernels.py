import json
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import integrate, linalg

from arnold_lab import _kernels as K
from arnold_lab.grid import make_grid


def brute_sweeps(r, c, p):
    n = len(r)
    lo = np.empty(n)
    up = np.empty(n)
    for i in range(n):
        lo[i] = sum((r[j] / r[i]) ** p * c[j] for j in range(i)) + c[i] / 2
        up[i] = sum((r[i] / r[j]) ** p * c[j] for j in range(i + 1, n)) + c[i] / 2
    return lo, up


@pytest.fixture(scope="module")
def rmid():
    return make_grid(200, 14.0, "midpoint_r").nodes


@pytest.mark.parametrize("p", [0.0, 1.0, 3.0, 7.0])
def test_split_sweeps_against_direct_sum(rmid, rng, p):
    c = rng.normal(size=rmid.size)
    ref = brute_sweeps(rmid, c, p)
    for impl in (K.split_sweeps_nb, K.split_sweeps_np):
        lo, up = impl(rmid, c, p)
        np.testing.assert_allclose(lo, ref[0], rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(up, ref[1], rtol=1e-10, atol=1e-10)


def test_split_sweeps_batch_backends_agree(rmid, rng):
    P = np.arange(9, dtype=float)
    C = rng.normal(size=(9, rmid.size)) + 1j * rng.normal(size=(9, rmid.size))
    a = K.split_sweeps_batch_nb(np.ascontiguousarray(C), K.sweep_factors(rmid, P))
    b = K.split_sweeps_batch_np(rmid, C, P)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_cell_sweeps_backends_agree(rng, k):
    g = make_grid(257, 20.0)
    r = g.nodes
    sq, gw, lw, st = g.cell_geometry()
    fs = np.ascontiguousarray(np.exp(-r * r / rng.uniform(2, 6)) * (1 + r))
    a = K.cell_sweeps_nb(r, fs, sq, gw, lw, st, float(k))
    b = K.cell_sweeps_np(r, fs, sq, gw, lw, st, k)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-11, atol=1e-14)


def test_cell_sweeps_exact_integral():
    g = make_grid(513, 12.0)
    r = g.nodes
    sq, gw, lw, st = g.cell_geometry()
    fs = np.ascontiguousarray(r * np.exp(-r * r / 4))
    lo, up = K.cell_sweeps_np(r, fs, sq, gw, lw, st, 1)
    # k = 1: lo(R) = R^{-1} int_0^R s^2 e^{-s^2/4} ds
    ref = integrate.quad(lambda s: s * s * np.exp(-s * s / 4), 0, 12.0)[0] / 12.0
    assert lo[-1] == pytest.approx(ref, rel=1e-8)
    assert up[-1] == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("dtype", [float, complex])
def test_thomas_against_banded_solver(rng, dtype):
    m, n = 5, 60
    lo = rng.normal(size=(m, n)).astype(dtype)
    up = rng.normal(size=(m, n)).astype(dtype)
    if dtype is complex:
        lo = lo + 1j * rng.normal(size=(m, n))
    di = 4.0 + np.abs(lo) + np.abs(up) + (1j if dtype is complex else 0)
    rhs = (rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))).astype(complex)
    if dtype is float:
        rhs = rhs.real.copy()
    for j in range(m):
        ab = np.zeros((3, n), dtype=np.result_type(di, rhs))
        ab[0, 1:] = up[j, :-1]
        ab[1] = di[j]
        ab[2, :-1] = lo[j, 1:]
        ref = linalg.solve_banded((1, 1), ab, rhs[j])
        for impl in (K.thomas_nb, K.thomas_np):
            np.testing.assert_allclose(impl(lo, di, up, rhs)[j], ref, rtol=1e-11, atol=1e-12)
    np.testing.assert_allclose(K.thomas(lo, di, up, rhs), K.thomas_np(lo, di, up, rhs), rtol=1e-12, atol=1e-14)


SNIPPET = """
import json
from arnold_lab import _kernels
from arnold_lab.evolve import run
log = run({"alpha": 2.0, "N": 96, "r_max": 12.0, "K": 4, "T": 0.2, "dt": 0.01,
           "init": {"kind": "random", "seed": 7, "radial": False}})
print(json.dumps({"backend": _kernels.backend(), "x": list(log.xnorm_series), "J": list(log.J_series)}))
"""


def _run_backend(no_numba):
    env = dict(os.environ)
    env.pop("ARNOLD_LAB_NO_NUMBA", None)
    if no_numba:
        env["ARNOLD_LAB_NO_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_backend_flag_and_trajectory_agreement():
    a = _run_backend(False)
    b = _run_backend(True)
    assert a["backend"] == ("numba" if K.HAS_NUMBA else "numpy")
    assert b["backend"] == "numpy"
    np.testing.assert_allclose(a["x"], b["x"], rtol=1e-9)
    np.testing.assert_allclose(a["J"], b["J"], rtol=1e-9)
