"""Eigenvalue problems: Hardy constants, B~_1, L_k, the log kernel and the quasimode."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import _kernels
from .grid import RadialGrid, make_grid
from .profiles import GaussianProfile, VortexProfile, eval_gaussian_BW, gaussian_Bm1_over_A, _h_aux

CONV_RTOL = 1e-4
HARDY_RMIN = 1e-4
HARDY_BCAP = 1e8
SYM_TOL = 1e-12

LN2 = np.log(2.0)
QUASI_C = 1.0 / np.sqrt(2 * LN2)
QUASI_CHAT = np.sqrt(3.0) / np.pi
QUASI_R2 = (3 - LN2 - 2 * np.log(np.pi)) / (16 * LN2)
QUASI_OVERLAP = np.sqrt(6 / LN2) / np.pi


class NonConvergence(RuntimeError):
    """Raised when a doubling study does not settle."""


@dataclass
class SpectralReport:
    operator: str
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray | None
    r: np.ndarray | None
    resolution: dict
    converged: bool | None = None
    derived: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "operator": self.operator,
            "eigenvalues": [float(v) for v in np.atleast_1d(self.eigenvalues)],
            "derived": {k: _jsonable(v) for k, v in self.derived.items()},
            "resolution": self.resolution,
            "converged": self.converged,
        }


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def _fix_sign(vecs):
    """Make the first extremum of every column positive."""
    vecs = np.atleast_2d(vecs)
    for j in range(vecs.shape[1]):
        v = vecs[:, j]
        i = np.argmax(np.abs(v) > 0.5 * np.max(np.abs(v)))
        # walk to the local extremum of that lobe
        while i + 1 < v.size and abs(v[i + 1]) >= abs(v[i]) and np.sign(v[i + 1]) == np.sign(v[i]):
            i += 1
        if v[i] < 0:
            vecs[:, j] = -v
    return vecs


def _agree(a, b, rtol=CONV_RTOL):
    a = np.atleast_1d(a)
    b = np.atleast_1d(b)
    n = min(a.size, b.size)
    return bool(np.all(np.abs(a[:n] - b[:n]) <= rtol * np.maximum(1.0, np.abs(a[:n]))))


def _check_symmetric(M):
    err = np.max(np.abs(M - M.T))
    if err > SYM_TOL * max(1.0, np.max(np.abs(M))):
        raise AssertionError(f"assembled matrix not symmetric ({err:.2e})")


# ---------------------------------------------------------------------------
# Hardy constant in the log variable
# ---------------------------------------------------------------------------

def hardy_window(profile: VortexProfile, r_max: float, r_min: float = HARDY_RMIN):
    """Log-window [log r_min, x_hi] where B(x) = A(e^x) e^{-2x} stays below a cap.

    Very large B values only add stiffness where the minimiser has already
    decayed, and they spoil the conditioning of the tridiagonal eigensolve.
    """
    xs = np.linspace(np.log(r_min), np.log(r_max), 4001)
    B = profile.weight_A(np.exp(xs)) * np.exp(-2 * xs)
    i0 = int(np.argmin(B))
    over = np.nonzero(B[i0:] > HARDY_BCAP * B[i0])[0]
    x_hi = xs[-1] if over.size == 0 else xs[i0 + max(over[0] - 1, 1)]
    return float(xs[0]), float(x_hi)


def hardy_cond_check(profile: VortexProfile, r_max: float) -> bool:
    """Second Hardy condition: log(r) int_r^inf s/A ds stays bounded for large r."""
    rs = np.geomspace(2.0, max(r_max, 4.0), 6)
    tails = []
    for r0 in rs:
        t = np.geomspace(r0, r0 * 1e6, 4000)
        tails.append(np.log(r0) * np.trapezoid(t * t / profile.weight_A(t), np.log(t)))
    tails = np.array(tails)
    return bool(np.all(np.isfinite(tails)) and tails[-1] <= 1.05 * np.max(tails[:2]) + 1e-12)


def _hardy_solve(profile, n, x_lo, x_hi, nev):
    x = np.linspace(x_lo, x_hi, n)
    dx = x[1] - x[0]
    xm = 0.5 * (x[1:] + x[:-1])
    Bf = profile.weight_A(np.exp(xm)) * np.exp(-2 * xm)
    # interior unknowns x_1 .. x_{n-2}; Dirichlet ends
    d = (Bf[:-1] + Bf[1:]) / dx**2
    e = -Bf[1:-1] / dx**2
    _, vecs = linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, nev - 1))
    # B spans many decades, so the dense solver's absolute error eps*|T| swamps
    # the bottom eigenvalue; polish with inverse subspace iteration, where the
    # banded Cholesky of this M-matrix and the sum-of-squares Ritz form keep
    # relative accuracy
    ab = np.zeros((2, d.size))
    ab[0, 1:] = e
    ab[1] = d
    cho = linalg.cholesky_banded(ab)

    def form(X):
        P = np.zeros((n, X.shape[1]))
        P[1:-1] = X
        D = np.diff(P, axis=0)
        return (D * Bf[:, None]).T @ D / dx**2

    X = vecs
    for _ in range(40):
        X, _ = np.linalg.qr(linalg.cho_solve_banded((cho, False), X))
    vals, c = np.linalg.eigh(form(X))
    vecs = X @ c
    h = np.zeros((n, nev))
    h[1:-1] = vecs / np.sqrt(dx)  # unit norm in L^2(dx) = L^2(dr/r)
    return x, vals, _fix_sign(h)


def hardy_constant(profile: VortexProfile, grid: RadialGrid, nev: int = 1, check: bool = True) -> SpectralReport:
    """Optimal constant C_H in int f^2 dr/r <= C_H int A f'^2 dr/r.

    The operator -(B h')' with B(x) = e^{-2x} A(e^x) is discretised on a
    uniform x-grid with grid.N points; C_H is the inverse of its lowest
    eigenvalue and the minimiser is f(r) = h(log r).
    """
    if not hardy_cond_check(profile, grid.r_max):
        raise ValueError("profile violates the Hardy tail condition")
    r_lo = grid.nodes[0] if grid.nodes[0] > 0 else HARDY_RMIN
    x_lo, x_hi = hardy_window(profile, grid.r_max, r_lo)
    x, vals, h = _hardy_solve(profile, grid.N, x_lo, x_hi, nev)
    conv = None
    derived = {"C_H": 1.0 / vals[0], "lambda_min": vals[0], "x_window": [x_lo, x_hi]}
    if check:
        _, vals2, _ = _hardy_solve(profile, 2 * grid.N - 1, x_lo, x_hi, nev)
        conv = _agree(vals, vals2)
        derived["C_H_refined"] = 1.0 / vals2[0]
    return SpectralReport("hardy_B", vals, h, np.exp(x), {"N": grid.N, "r_max": float(np.exp(x_hi))},
                          conv, derived)


def vsign_hardy_check(profile: VortexProfile, grid: RadialGrid, tol: float = 1e-10) -> str:
    """Side of 1 on which C_H lies, read off from the sign of V on the grid."""
    r = grid.nodes[grid.nodes > 0]
    V = profile.potential_V(r)
    if np.max(np.abs(V)) < tol:
        return "C_H=1"
    if np.min(V) > tol:
        return "C_H<1"
    if np.max(V) < -tol:
        return "C_H>1"
    return "indeterminate"


# ---------------------------------------------------------------------------
# B_k and B~_1
# ---------------------------------------------------------------------------

def bk_apply(k: int, f, grid: RadialGrid):
    """g = B_k[f] = (1/2|k|) int min(r/s, s/r)^|k| f(s) s ds by two O(N) sweeps."""
    k = abs(int(k))
    if k == 0:
        raise ValueError("B_k is defined for k != 0")
    f = np.asarray(f)
    r = grid.nodes
    sq, gw, lw, st = grid.cell_geometry()
    fs = f * r
    if np.iscomplexobj(fs):
        lr, ur = _kernels.cell_sweeps(r, np.ascontiguousarray(fs.real), sq, gw, lw, st, k)
        li, ui = _kernels.cell_sweeps(r, np.ascontiguousarray(fs.imag), sq, gw, lw, st, k)
        return (lr + ur + 1j * (li + ui)) / (2 * k)
    lo, up = _kernels.cell_sweeps(r, np.ascontiguousarray(fs, dtype=float), sq, gw, lw, st, k)
    return (lo + up) / (2 * k)


def _kernel_matrix(r, k):
    with np.errstate(divide="ignore", invalid="ignore"):
        R = r[:, None] / r[None, :]
        K = np.minimum(R, 1.0 / R) ** k
    K[~np.isfinite(K)] = 0.0
    np.fill_diagonal(K, 1.0)
    return K


def _btilde1_matrix(profile, grid):
    r = grid.nodes
    w = grid.quad_weights
    ia = profile.weight_A(r) ** -0.5
    sw = np.sqrt(w)
    K = 0.5 * _kernel_matrix(r, 1)
    M = (sw * ia)[:, None] * K * (sw * ia)[None, :]
    return 0.5 * (M + M.T), sw, ia


def _top_eigs(M, nev):
    n = M.shape[0]
    vals, vecs = linalg.eigh(M, subset_by_index=(n - nev, n - 1))
    return vals[::-1], vecs[:, ::-1]


def btilde1_spectrum(profile: VortexProfile, grid: RadialGrid, nev: int = 3, check: bool = True) -> SpectralReport:
    """Top of the spectrum of A^{-1/2} B_1 A^{-1/2} in L^2(r dr).

    Also reports C1_prime, the top eigenvalue after compressing to the
    complement of A^{-1/2} (the constraint int w_1 r dr = 0).
    """
    M, sw, ia = _btilde1_matrix(profile, grid)
    _check_symmetric(M)
    vals, vecs = _top_eigs(M, nev)
    pos = sw > 0
    ef = np.zeros_like(vecs)
    ef[pos] = vecs[pos] / sw[pos, None]
    ef = _fix_sign(ef)
    # compression onto the constrained hyperplane
    v = sw * ia
    v /= np.linalg.norm(v)
    P = np.eye(M.shape[0]) - np.outer(v, v)
    Mp = P @ M @ P
    Mp = 0.5 * (Mp + Mp.T)
    c1p = _top_eigs(Mp, 1)[0][0]
    r = grid.nodes
    h = -np.sqrt(profile.weight_A(r)) * profile.omega_prime(r)
    hn = h / np.sqrt(grid.integrate(h * h))
    e0 = ef[:, 0] / np.sqrt(grid.integrate(ef[:, 0] ** 2))
    derived = {
        "spectral_radius": float(np.max(np.abs(vals))),
        "lambda_2": float(vals[1]) if nev > 1 else None,
        "gap": float(1 - vals[1]) if nev > 1 else None,
        "C1_prime": float(c1p),
        "eigfn_L2_error": float(np.sqrt(grid.integrate((e0 - hn) ** 2))),
    }
    conv = None
    if check:
        g2 = grid.refined()
        M2, _, _ = _btilde1_matrix(profile, g2)
        conv = _agree(vals, _top_eigs(M2, nev)[0])
    return SpectralReport("btilde1", vals, ef, grid.nodes, {"N": grid.N, "r_max": grid.r_max}, conv, derived)


# ---------------------------------------------------------------------------
# Log kernel on radial fields
# ---------------------------------------------------------------------------

def _log_kernel_matrix(profile, grid):
    r = grid.nodes
    sw = np.sqrt(grid.quad_weights)
    ia = profile.weight_A(r) ** -0.5
    with np.errstate(divide="ignore"):
        L = -np.log(np.maximum(r[:, None], r[None, :]))
    L[~np.isfinite(L)] = 0.0  # only at r = s = 0, where the weight vanishes
    M = (sw * ia)[:, None] * L * (sw * ia)[None, :]
    return 0.5 * (M + M.T)


def kernel_index(profile: VortexProfile, grid: RadialGrid, nev: int = 4, check: bool = True) -> SpectralReport:
    """Largest eigenvalues of -log max(r,s) A(r)^{-1/2} A(s)^{-1/2}; index = #eigenvalues > 1."""
    if not profile.beta > 2:
        raise ValueError("kernel is not Hilbert-Schmidt for beta <= 2")
    M = _log_kernel_matrix(profile, grid)
    _check_symmetric(M)
    vals, vecs = _top_eigs(M, nev)
    sw = np.sqrt(grid.quad_weights)
    ef = np.zeros_like(vecs)
    pos = sw > 0
    ef[pos] = vecs[pos] / sw[pos, None]
    conv = None
    if check:
        conv = _agree(vals, _top_eigs(_log_kernel_matrix(profile, grid.refined()), nev)[0], rtol=1e-3)
    derived = {"largest": float(vals[0]), "index": int(np.sum(vals > 1.0))}
    return SpectralReport("kernel_K", vals, _fix_sign(ef), grid.nodes,
                          {"N": grid.N, "r_max": grid.r_max}, conv, derived)


# ---------------------------------------------------------------------------
# L_k = -(1/r)(r u')' + k^2/r^2 + W  (Gaussian), finite volumes in r dr
# ---------------------------------------------------------------------------

def _fv_parts(grid: RadialGrid, k: int):
    """Vertex-centred finite volumes: (idx, mass, diag stiffness, offdiag stiffness)."""
    r = grid.nodes
    faces = np.concatenate([[0.0], 0.5 * (r[1:] + r[:-1]), [r[-1]]])
    mass = 0.5 * (faces[1:] ** 2 - faces[:-1] ** 2)
    cond = faces[1:-1] / np.diff(r)  # r_{i+1/2} / (r_{i+1} - r_i)
    d = np.zeros_like(r)
    d[:-1] += cond
    d[1:] += cond
    k2 = np.zeros_like(r)
    if k != 0:
        with np.errstate(divide="ignore"):
            k2 = k * k * np.log(faces[1:] / faces[:-1])
        if r[0] > 0:
            k2[0] = k * k * faces[1] / r[0]
    lo = 1 if (k != 0 and r[0] == 0) else 0
    idx = np.arange(lo, r.size - 1)  # Dirichlet at r_max
    return idx, mass[idx], d[idx] + k2[idx], -cond[idx[:-1]]


def lk_matrices(k: int, grid: RadialGrid, W=None):
    """Tridiagonal stiffness (diag, off) and lumped mass for L_k."""
    idx, m, d, e = _fv_parts(grid, abs(int(k)))
    if W is None:
        W = eval_gaussian_BW(grid.nodes)[1]
    return idx, m, d + W[idx] * m, e


def _lk_eigs(k, grid, nev, W=None, weight=None):
    idx, m, d, e = lk_matrices(k, grid, W)
    if weight is not None:
        m = m * weight[idx]
    s = 1.0 / np.sqrt(m)
    dd = d * s * s
    ee = e * s[:-1] * s[1:]
    vals, vecs = linalg.eigh_tridiagonal(dd, ee, select="i", select_range=(0, nev - 1))
    u = np.zeros((grid.N, nev))
    u[idx] = vecs * s[:, None]
    return vals, _fix_sign(u)


def _richardson(v1, v2, order=2):
    f = 2.0**order
    return (f * v2 - v1) / (f - 1)


def lk_spectrum(k: int, grid: RadialGrid, nev: int = 2, check: bool = True) -> SpectralReport:
    """Lowest eigenvalues of L_k for the Oseen profile on the measure r dr."""
    k = abs(int(k))
    vals, u = _lk_eigs(k, grid, nev)
    derived = {}
    conv = None
    if check:
        vals2, _ = _lk_eigs(k, grid.refined(), nev)
        conv = _agree(vals, vals2)
        derived["extrapolated"] = _richardson(vals, vals2).tolist()
        derived["refined"] = vals2.tolist()
    if k == 0:
        derived["mu0"] = float(vals[0])
        derived["mu1"] = float(vals[1]) if nev > 1 else None
    return SpectralReport(f"L_{k}", vals, u, grid.nodes, {"N": grid.N, "r_max": grid.r_max}, conv, derived)


def l0_generalized(profile: VortexProfile, grid: RadialGrid, nev: int = 2, check: bool = True) -> SpectralReport:
    """-(1/r)(r g')' + g/r^2 = mu g/A with g(0) = g(inf) = 0; lowest mu is 1."""
    ia = 1.0 / profile.weight_A(grid.nodes)
    zero = np.zeros(grid.N)
    vals, u = _lk_eigs(1, grid, nev, W=zero, weight=ia)
    conv = None
    if check:
        g2 = grid.refined()
        vals2, _ = _lk_eigs(1, g2, nev, W=np.zeros(g2.N), weight=1.0 / profile.weight_A(g2.nodes))
        conv = _agree(vals, vals2)
    return SpectralReport("generalized_L0", vals, u, grid.nodes, {"N": grid.N, "r_max": grid.r_max}, conv, {})


def lk_quadratic_form(k: int, w, grid: RadialGrid, dw=None) -> float:
    """2 pi int (|w'|^2 + k^2|w|^2/r^2 + W|w|^2) r dr with high-order derivatives."""
    from .forms import radial_derivative

    r = grid.nodes
    if dw is None:
        dw = radial_derivative(w, grid, parity=abs(k) % 2)
    W = eval_gaussian_BW(r)[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        cent = np.where(r > 0, k * k * np.abs(w) ** 2 / r**2, 0.0)
    if k != 0 and r[0] == 0:
        cent[0] = np.abs(dw[0]) ** 2 if abs(k) == 1 else 0.0
    return float(2 * np.pi * grid.integrate(np.abs(dw) ** 2 + cent + W * np.abs(w) ** 2))


# ---------------------------------------------------------------------------
# Quasimode, coercivity and Rayleigh bounds
# ---------------------------------------------------------------------------

def coercivity_bound(a: float, b: float, overlap: float) -> float:
    """(a + b) overlap^2 - a: lower bound of L on the hyperplane orthogonal to psi."""
    if a + b < 0:
        raise ValueError("need a + b >= 0")
    if not 0 <= abs(overlap) <= 1 + 1e-12:
        raise ValueError("overlap must lie in [0, 1]")
    return (a + b) * overlap**2 - a


def _unit(v, grid):
    return v / np.sqrt(grid.integrate(v * v))


def _oseen_chi(r):
    return GaussianProfile().chi(r)


def delta_chain(grid: RadialGrid, nev_check: bool = False) -> dict:
    """Coercivity constant of the diffusive form on the constrained space.

    k = 0: lemma with a = -mu0, b = mu1 and the overlap of the ground state
    with e^{-chi}; k = 1: lemma with a = 0, b = second eigenvalue, overlap of
    e^chi r e^{-s} with r e^{-chi}; k = 2: lowest eigenvalue of L_2; |k| >= 3: 1/2.
    """
    r = grid.nodes
    chi = _oseen_chi(r)
    l0 = lk_spectrum(0, grid, nev=2, check=nev_check)
    mu0, mu1 = l0.eigenvalues[:2]
    ov0 = abs(grid.integrate(_unit(l0.eigenfunctions[:, 0], grid) * _unit(np.exp(-chi), grid)))
    d0 = coercivity_bound(-mu0, mu1, ov0)
    l1 = lk_spectrum(1, grid, nev=2, check=nev_check)
    g1 = np.exp(chi) * r * np.exp(-r * r / 4)
    ov1 = abs(grid.integrate(_unit(g1, grid) * _unit(r * np.exp(-chi), grid)))
    d1 = coercivity_bound(max(-l1.eigenvalues[0], 0.0), l1.eigenvalues[1], ov1)
    d2 = float(lk_spectrum(2, grid, nev=1, check=False).eigenvalues[0])
    parts = {"k0": float(d0), "k1": float(d1), "k2": d2, "k3plus": 0.5}
    return {"delta": min(parts.values()), "parts": parts, "mu0": float(mu0), "mu1": float(mu1),
            "overlap0": float(ov0), "overlap1": float(ov1), "lambda2_L1": float(l1.eigenvalues[1])}


def quasimode_analysis(grid: RadialGrid) -> SpectralReport:
    """Residual of the Oseen quasimode g = c e^chi e^{-s} for L_0 + 3/4."""
    r = grid.nodes
    s = r * r / 4
    chi = _oseen_chi(r)
    g = QUASI_C * np.exp(chi - s)
    R = (0.75 - gaussian_Bm1_over_A(r)) * g
    psi = QUASI_CHAT * np.exp(-chi)
    R2 = float(grid.integrate(R * R))
    eps = np.sqrt(R2)
    ov = float(grid.integrate(psi * g))
    chain = delta_chain(grid)
    # bound using only the quasimode data: d >= 1.2, overlap >= <psi,g> - 2 eps/d
    ov_lb = ov - 2 * eps / 1.2
    derived = {
        "R_norm_sq": R2, "R_norm_sq_closed": QUASI_R2, "epsilon": eps,
        "g_norm_sq": float(grid.integrate(g * g)), "psi_norm_sq": float(grid.integrate(psi * psi)),
        "overlap": ov, "overlap_closed": QUASI_OVERLAP, "R_min": float(np.min(R[r > 0])),  # R(0) = 0 exactly
        "mu0_interval": [-0.75, -0.75 + eps], "delta_quasimode": coercivity_bound(0.75, 0.45, ov_lb),
        "delta": chain["delta"], "delta_parts": chain["parts"], "mu0": chain["mu0"], "mu1": chain["mu1"],
    }
    return SpectralReport("quasimode", np.array([chain["mu0"], chain["mu1"]]), np.stack([g, R, psi], axis=1),
                          r, {"N": grid.N, "r_max": grid.r_max}, None, derived)


def improved_beta(alpha: float) -> float:
    e = np.exp(-1 / alpha)
    return alpha * (1 - 2 * e) / (2 * alpha - 1 + 2 * e * (1 - alpha))


def rayleigh_quotient(s, alpha: float, beta: float = 0.0):
    """R[f] = L~_0 f / (A f) for f = e^{-s}(1 - alpha s)(1 + beta s).

    Uses L~_0 f = -e^s f_s - (e^s - 1) f_ss - B f and A = (e^s - 1)/s.
    Returns (numerator, denominator) so that zero crossings can be inspected.
    """
    s = np.asarray(s, dtype=float)
    p = np.polynomial.Polynomial([1.0, -alpha]) * np.polynomial.Polynomial([1.0, beta])
    p1, p2 = p.deriv(), p.deriv(2)
    P, P1, P2 = p(s), p1(s), p2(s)
    om = -np.expm1(-s)  # 1 - e^{-s}
    with np.errstate(divide="ignore", invalid="ignore"):
        # B e^{-s} = e^{-s} + (1 + s - (1 + 2s) e^{-s}) / (2 s^2)
        tail = np.where(s > 1e-3, (1 + s - (1 + 2 * s) * np.exp(-s)) / (2 * s * s), 0.75 - 5 * s / 12)
    Be = np.exp(-s) + tail
    num = -(P1 - P) - om * (P2 - 2 * P1 + P) - Be * P
    den = np.where(s > 0, om / np.where(s > 0, s, 1.0), 1.0) * P
    return num, den


def rayleigh_mu1_bounds(alpha: float | None = None, use_improved: bool = False, grid: RadialGrid | None = None):
    """Two-sided bounds (min, max) of the Rayleigh quotient over the grid nodes."""
    if grid is None:
        grid = make_grid(2049, 30.0)
    if alpha is None:
        alpha = 1.4 if use_improved else 1 / LN2
    beta = 0.0
    if use_improved:
        if not 0.5 < alpha < 1 / LN2:
            raise ValueError("improved trial needs 1/2 < alpha < 1/log 2")
        beta = improved_beta(alpha)
    s = grid.nodes**2 / 4
    n_star, _ = rayleigh_quotient(np.array([1 / alpha]), alpha, beta)
    if abs(n_star[0]) > 1e-8:
        raise ValueError("trial function gives a singular Rayleigh quotient")
    num, den = rayleigh_quotient(s, alpha, beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = num / den
    # nodes that land on the removable zero carry no information
    ok = np.abs(den) > 1e-10 * np.max(np.abs(den))
    q = q[ok]
    return float(np.min(q)), float(np.max(q))
