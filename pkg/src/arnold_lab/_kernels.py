"""Hot loops with a numba path and a pure-numpy fallback.

The backend is chosen once at import.  Set ``ARNOLD_LAB_NO_NUMBA=1`` to force
the numpy implementations (useful for debugging and for the benchmark).
Both implementations are always importable as ``*_nb`` / ``*_np`` so tests can
compare them directly.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("ARNOLD_LAB_NO_NUMBA", "") not in ("1", "true", "yes")


def _jit(fn):
    if not HAS_NUMBA:
        return fn
    return nb.njit(cache=True, error_model="numpy")(fn)


# ---------------------------------------------------------------------------
# Split-kernel sweeps:  lo_i = sum_{j<i} (r_j/r_i)^p c_j + c_i/2
#                       up_i = sum_{j>i} (r_i/r_j)^p c_j + c_i/2
# ---------------------------------------------------------------------------

def _split_sweeps_np(r, c, p):
    # scaled cumulative sums; safe while r**p stays inside the float range
    if p == 0:
        return np.cumsum(c) - 0.5 * c, np.cumsum(c[::-1])[::-1] - 0.5 * c
    pos = r > 0.0
    rp = r**p
    safe = np.where(pos, rp, 1.0)
    lo = np.where(pos, (np.cumsum(rp * c) - 0.5 * rp * c) / safe, 0.5 * c)
    inv = np.where(pos, 1.0 / safe, 0.0)
    tail = np.cumsum((inv * c)[::-1])[::-1]
    up = np.where(pos, rp * (tail - inv * c), 0.0) + 0.5 * c
    return lo, up


def _split_sweeps_loop(r, c, p):
    n = r.shape[0]
    lo = np.empty_like(c)
    up = np.empty_like(c)
    acc = c[0] * 0.0
    for i in range(n):
        if i > 0:
            ratio = r[i - 1] / r[i] if r[i] > 0.0 else 0.0
            acc = acc * ratio**p
        lo[i] = acc + 0.5 * c[i]
        acc = acc + c[i]
    acc = c[0] * 0.0
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            acc = acc * (r[i] / r[i + 1]) ** p
        up[i] = acc + 0.5 * c[i]
        acc = acc + c[i]
    return lo, up


split_sweeps_nb = _jit(_split_sweeps_loop)
split_sweeps_np = _split_sweeps_np


def split_sweeps(r, c, p):
    """Half-diagonal lower/upper sweeps of the kernel min(r/s, s/r)^p."""
    c = np.ascontiguousarray(c)
    if USE_NUMBA:
        return split_sweeps_nb(r, c, float(p))
    return split_sweeps_np(r, c, p)


def sweep_factors(r, P):
    """Per-row decay factors (r_{i-1}/r_i)^p used by the batched sweeps."""
    r = np.asarray(r, dtype=float)
    ratio = np.zeros_like(r)
    ratio[1:] = np.where(r[1:] > 0.0, r[:-1] / np.where(r[1:] > 0.0, r[1:], 1.0), 0.0)
    return np.ascontiguousarray(ratio[None, :] ** np.asarray(P, dtype=float)[:, None])


def _split_sweeps_batch_loop(C, F):
    m, n = C.shape
    lo = np.empty_like(C)
    up = np.empty_like(C)
    for j in range(m):
        acc = C[j, 0] * 0.0
        for i in range(n):
            if i > 0:
                acc = acc * F[j, i]
            lo[j, i] = acc + 0.5 * C[j, i]
            acc = acc + C[j, i]
        acc = C[j, 0] * 0.0
        for i in range(n - 1, -1, -1):
            if i < n - 1:
                acc = acc * F[j, i + 1]
            up[j, i] = acc + 0.5 * C[j, i]
            acc = acc + C[j, i]
    return lo, up


def _split_sweeps_batch_np(r, C, P):
    lo = np.empty_like(C)
    up = np.empty_like(C)
    for j in range(C.shape[0]):
        lo[j], up[j] = _split_sweeps_np(r, C[j], P[j])
    return lo, up


split_sweeps_batch_nb = _jit(_split_sweeps_batch_loop)
split_sweeps_batch_np = _split_sweeps_batch_np


def split_sweeps_batch(r, C, P, factors=None):
    """split_sweeps applied to each row C[j] with exponent P[j].

    factors, if given, must be sweep_factors(r, P); callers that reuse the
    same exponents should cache it.
    """
    C = np.ascontiguousarray(C)
    if USE_NUMBA:
        if factors is None:
            factors = sweep_factors(r, P)
        return split_sweeps_batch_nb(C, factors)
    return split_sweeps_batch_np(r, C, np.asarray(P, dtype=float))


# ---------------------------------------------------------------------------
# High-order cumulative integrals for B_k:
#   lo_i = int_0^{r_i} (s/r_i)^k f(s) s ds,  up_i = int_{r_i}^{r_max} (r_i/s)^k f(s) s ds
# fs holds the product f(s) s at the nodes.
# Each cell [r_i, r_{i+1}] carries Gauss points sq[i, q] with weights gw[i, q]
# and cubic interpolation weights lw[i, q, m] onto nodes st[i] + m.
# ---------------------------------------------------------------------------

def _cell_sweeps_loop(r, fs, sq, gw, lw, st, k):
    n = r.shape[0]
    nq = sq.shape[1]
    lo = np.zeros_like(fs)
    up = np.zeros_like(fs)
    for i in range(n - 1):
        a = r[i]
        b = r[i + 1]
        s0 = st[i]
        cell_lo = fs[0] * 0.0
        cell_up = fs[0] * 0.0
        for q in range(nq):
            val = fs[0] * 0.0
            for m in range(4):
                val += lw[i, q, m] * fs[s0 + m]
            s = sq[i, q]
            cell_lo += gw[i, q] * (s / b) ** k * val
            if a > 0.0 or k == 0.0:
                cell_up += gw[i, q] * (a / s) ** k * val
        lo[i + 1] = (a / b) ** k * lo[i] + cell_lo
        up[i] = cell_up
    for i in range(n - 2, -1, -1):
        if r[i] > 0.0 or k == 0.0:
            up[i] += (r[i] / r[i + 1]) ** k * up[i + 1]
    if r[0] > 0.0:
        lo[0] = 0.0
    return lo, up


def _cell_sweeps_np(r, fs, sq, gw, lw, st, k):
    idx = st[:, None] + np.arange(4)[None, :]
    vals = np.einsum("iqm,im->iq", lw, fs[idx])
    b = r[1:]
    a = r[:-1]
    cell_lo = np.sum(gw * (sq / b[:, None]) ** k * vals, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cell_up = np.where(a[:, None] > 0.0, gw * (a[:, None] / sq) ** k * vals, 0.0).sum(axis=1)
    # lo_{i+1} = (a/b)^k lo_i + cell_lo_i  ->  scaled cumulative sum
    n = r.shape[0]
    lo = np.zeros(n, dtype=np.result_type(fs, float))
    up = np.zeros(n, dtype=np.result_type(fs, float))
    if k == 0:
        lo[1:] = np.cumsum(cell_lo)
        up[:-1] = np.cumsum(cell_up[::-1])[::-1]
        return lo, up
    rk = b**k
    lo[1:] = np.cumsum(cell_lo * rk) / rk
    ak = np.where(a > 0.0, a, 1.0) ** k
    tail = np.cumsum((cell_up / ak)[::-1])[::-1]
    up[:-1] = np.where(a > 0.0, tail * ak, 0.0)
    return lo, up


cell_sweeps_nb = _jit(_cell_sweeps_loop)
cell_sweeps_np = _cell_sweeps_np


def cell_sweeps(r, fs, sq, gw, lw, st, k):
    fs = np.ascontiguousarray(fs)
    if USE_NUMBA:
        return cell_sweeps_nb(r, fs, sq, gw, lw, st, float(k))
    return cell_sweeps_np(r, fs, sq, gw, lw, st, k)


# ---------------------------------------------------------------------------
# Batched tridiagonal solve (Thomas); coefficients may be complex.
# lower[j, i] multiplies x[i-1], upper[j, i] multiplies x[i+1].
# ---------------------------------------------------------------------------

def _thomas_loop(lower, diag, upper, rhs):
    nb_, n = rhs.shape
    out = np.empty_like(rhs)
    cp = np.empty(n, dtype=rhs.dtype)
    dp = np.empty(n, dtype=rhs.dtype)
    for j in range(nb_):
        beta = diag[j, 0]
        cp[0] = upper[j, 0] / beta
        dp[0] = rhs[j, 0] / beta
        for i in range(1, n):
            beta = diag[j, i] - lower[j, i] * cp[i - 1]
            cp[i] = upper[j, i] / beta
            dp[i] = (rhs[j, i] - lower[j, i] * dp[i - 1]) / beta
        out[j, n - 1] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            out[j, i] = dp[i] - cp[i] * out[j, i + 1]
    return out


def _thomas_np(lower, diag, upper, rhs):
    n = rhs.shape[1]
    cp = np.empty(lower.shape, dtype=np.result_type(lower, diag, upper))
    dp = np.empty(rhs.shape, dtype=np.result_type(rhs, cp))
    beta = diag[:, 0]
    cp[:, 0] = upper[:, 0] / beta
    dp[:, 0] = rhs[:, 0] / beta
    for i in range(1, n):
        beta = diag[:, i] - lower[:, i] * cp[:, i - 1]
        cp[:, i] = upper[:, i] / beta
        dp[:, i] = (rhs[:, i] - lower[:, i] * dp[:, i - 1]) / beta
    out = np.empty_like(dp)
    out[:, -1] = dp[:, -1]
    for i in range(n - 2, -1, -1):
        out[:, i] = dp[:, i] - cp[:, i] * out[:, i + 1]
    return out


thomas_nb = _jit(_thomas_loop)
thomas_np = _thomas_np


def thomas(lower, diag, upper, rhs):
    """Solve each banded system j; rhs is promoted to the coefficient dtype."""
    dt = np.result_type(lower, diag, upper, rhs)
    rhs = np.ascontiguousarray(rhs, dtype=dt)
    lower = np.ascontiguousarray(lower, dtype=dt)
    diag = np.ascontiguousarray(diag, dtype=dt)
    upper = np.ascontiguousarray(upper, dtype=dt)
    if USE_NUMBA:
        return thomas_nb(lower, diag, upper, rhs)
    return thomas_np(lower, diag, upper, rhs)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
