"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 20]

Each kernel is called once first so JIT compilation is excluded.  The last
section times one full evolution step under each backend in a subprocess,
since the backend is fixed at import by ARNOLD_LAB_NO_NUMBA.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from arnold_lab import _kernels as K
from arnold_lab.grid import make_grid


def best_of(fn, repeat):
    fn()
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return min(ts)


def kernel_cases(N=1024, rows=33):
    rng = np.random.default_rng(0)
    g = make_grid(N, 20.0)
    r = g.nodes
    sq, gw, lw, st = g.cell_geometry()
    fs = np.ascontiguousarray(rng.normal(size=N) * r)
    rm = make_grid(N, 14.0, "midpoint_r").nodes
    c = rng.normal(size=N)
    C = rng.normal(size=(rows, N))
    P = np.arange(rows, dtype=float)
    F = K.sweep_factors(rm, P)
    lo = rng.normal(size=(rows, N)) + 0j
    up = rng.normal(size=(rows, N)) + 0j
    di = 4.0 + np.abs(lo) + np.abs(up) + 1j
    rhs = rng.normal(size=(rows, N)) + 1j * rng.normal(size=(rows, N))
    return {
        f"cell_sweeps N={N}": (lambda: K.cell_sweeps_nb(r, fs, sq, gw, lw, st, 3),
                               lambda: K.cell_sweeps_np(r, fs, sq, gw, lw, st, 3)),
        f"split_sweeps N={N}": (lambda: K.split_sweeps_nb(rm, c, 2.0),
                                lambda: K.split_sweeps_np(rm, c, 2.0)),
        f"split_sweeps_batch {rows}x{N}": (lambda: K.split_sweeps_batch_nb(C, F),
                                           lambda: K.split_sweeps_batch_np(rm, C, P)),
        f"thomas complex {rows}x{N}": (lambda: K.thomas_nb(lo, di, up, rhs),
                                       lambda: K.thomas_np(lo, di, up, rhs)),
    }


STEP_SNIPPET = """
import time
from arnold_lab.evolve import Evolver, evolution_grid, init_state
g = evolution_grid()
st = init_state({"kind": "random", "seed": 0}, 1.0, g)
ev = Evolver(g, 1.0, 0.01)
c = st.field.coeffs
c = ev.step(c)
t = time.perf_counter()
for _ in range(REPEAT):
    c = ev.step(c)
print((time.perf_counter() - t) / REPEAT)
"""


def step_time(no_numba, repeat):
    env = dict(os.environ)
    if no_numba:
        env["ARNOLD_LAB_NO_NUMBA"] = "1"
    else:
        env.pop("ARNOLD_LAB_NO_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", STEP_SNIPPET.replace("REPEAT", str(repeat))],
                         env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--N", type=int, default=1024)
    ap.add_argument("--skip-step", action="store_true")
    args = ap.parse_args(argv)
    if not K.HAS_NUMBA:
        print("numba is not installed; nothing to compare")
        return
    print(f"{'kernel':34s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, (fnb, fnp) in kernel_cases(args.N).items():
        a, b = best_of(fnb, args.repeat), best_of(fnp, args.repeat)
        print(f"{name:34s} {1e3 * a:10.3f} {1e3 * b:10.3f} {b / a:8.1f}")
    if not args.skip_step:
        a, b = step_time(False, args.repeat), step_time(True, args.repeat)
        print(f"{'evolve step N=512 K=16':34s} {1e3 * a:10.3f} {1e3 * b:10.3f} {b / a:8.1f}")


if __name__ == "__main__":
    main()
