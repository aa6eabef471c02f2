"""Energy, entropy and free energy of planar vorticity fields.

All energies use the planar normalisation E = (1/4 pi) int int log(1/|x-y|) w w,
which for radial fields reduces to -pi int int log max(r,s) w(r) w(s) r s dr ds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from . import _kernels
from .grid import PolarField, RadialGrid
from .profiles import EULER_GAMMA, VortexProfile, ein, make_profile

LN2 = np.log(2.0)
_LAG_X, _LAG_W = special.roots_laguerre(80)


# ---------------------------------------------------------------------------
# Radial energy and stream
# ---------------------------------------------------------------------------

def cumulative_mass(w, grid: RadialGrid):
    """m(r_i) = int_0^{r_i} w(s) s ds (high-order cell integration)."""
    r = grid.nodes
    sq, gw, lw, st = grid.cell_geometry()
    lo, _ = _kernels.cell_sweeps(r, np.ascontiguousarray(np.asarray(w, dtype=float) * r), sq, gw, lw, st, 0)
    if r[0] > 0:
        lo = lo + 0.5 * r[0] ** 2 * w[0]
    return lo


def energy_radial(w, grid: RadialGrid) -> float:
    """-pi int int log max(r,s) w(r) w(s) r s dr ds.

    With m(r) = int_0^r w s ds the double integral collapses to
    pi int_0^R m^2 dr / r - pi m(R)^2 log R.
    """
    w = np.asarray(w, dtype=float)
    r = grid.nodes
    m = cumulative_mass(w, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(r > 0, (m / np.where(r > 0, r, 1.0)) ** 2, 0.0)
    return float(np.pi * grid.integrate(q) - np.pi * m[-1] ** 2 * np.log(grid.r_max))


def stream_radial(w, grid: RadialGrid):
    """psi_0(r) = int log max(r,s) w(s) s ds (so that Laplacian psi_0 = w).

    Integrating by parts, psi_0(r) = m(R) log R - int_r^R m(s)/s ds, which
    avoids the log singularity of the direct form.
    """
    w = np.asarray(w, dtype=float)
    r = grid.nodes
    m = cumulative_mass(w, grid)
    sq, gw, lw, st = grid.cell_geometry()
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(r > 0, m / np.where(r > 0, r, 1.0), 0.0)
    _, up = _kernels.cell_sweeps(r, np.ascontiguousarray(q), sq, gw, lw, st, 0)
    return m[-1] * np.log(grid.r_max) - up


def energy_modes(field: PolarField) -> float:
    """E = E_rad(w_0) + pi sum_{k != 0} int B_k[w_k] conj(w_k) r dr."""
    from .spectral import bk_apply

    g = field.grid
    E = energy_radial(field.mode(0).real, g)
    for k in range(1, field.K + 1):
        for kk in (k, -k):
            w = field.mode(kk)
            if np.any(w != 0):
                E += np.pi * g.integrate(bk_apply(k, w, g) * np.conj(w)).real
    return float(E)


# ---------------------------------------------------------------------------
# Energy through the level-set areas
# ---------------------------------------------------------------------------

@dataclass
class ConstraintProfile:
    """h(a) = |{w > a}| / pi for a in (0, m); M0 = pi int h.

    hbar_t(t) returns h at a = m e^{-t}; the substitution keeps the
    integrands smooth for both Gaussian and algebraic tails.
    """

    hbar_t: Callable
    m: float
    M0: float
    t_max: float = 80.0

    def hbar(self, a):
        a = np.asarray(a, dtype=float)
        return self.hbar_t(np.log(self.m / a))

    @classmethod
    def from_profile(cls, profile: VortexProfile, t_max: float | None = None):
        m = float(profile.omega_star(0.0))
        beta = profile.beta
        if t_max is None:
            # area ~ a^{-2/beta}; a * h^2 must be negligible at the cut
            t_max = 80.0 if not np.isfinite(beta) else min(60.0 * beta / (beta - 2.0), 700.0)
        return cls(lambda t: profile.omega_inverse(m * np.exp(-np.asarray(t))) ** 2, m, float(profile.mass),
                   float(t_max))

    @classmethod
    def from_radial(cls, w, grid: RadialGrid):
        """From a nonincreasing radial sample; the area beyond r_max is dropped."""
        w = np.asarray(w, dtype=float)
        r = grid.nodes
        m = float(w[0]) if r[0] == 0 else float(w[0])
        ww = np.maximum(w, 1e-300)
        lt = np.log(m / ww)
        if np.any(np.diff(lt) < -1e-12):
            raise ValueError("radial sample is not nonincreasing")
        r2 = r * r
        tmax = float(lt[-1])

        def hb(t):
            return np.interp(t, lt, r2, right=0.0)

        M0 = 2 * np.pi * grid.integrate(w)
        return cls(hb, m, float(M0), tmax)


def L_kernel(R, S):
    """L(R,S) = -R S log max(R,S) - min(R,S)^2 / 2."""
    R = np.asarray(R, dtype=float)
    S = np.asarray(S, dtype=float)
    mx = np.maximum(R, S)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(mx > 0, np.log(np.where(mx > 0, mx, 1.0)), 0.0)
    return -R * S * lg - 0.5 * np.minimum(R, S) ** 2


def energy_via_h(cp: ConstraintProfile, n: int = 40001) -> float:
    """(pi/8) int int L(h(a), h(b)) da db + M0^2/(8 pi), collapsed to one dimension.

    For nonincreasing h the double integral equals
    2 int_0^m [-h log h P(a) - Q(a)/2] da with P = int_a^m h and Q = int_a^m h^2.
    """
    t = np.linspace(0.0, cp.t_max, n)
    h = np.asarray(cp.hbar_t(t), dtype=float)
    if np.any(np.diff(h) < -1e-12 * max(1.0, np.max(np.abs(h)))):
        raise ValueError("h must be nonincreasing in a")
    if not np.any(h > 0):
        return 0.0
    a = cp.m * np.exp(-t)  # da = -a dt, a decreases along t
    P = integrate.cumulative_simpson(h * a, x=t, initial=0.0)
    Q = integrate.cumulative_simpson(h * h * a, x=t, initial=0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        hlog = np.where(h > 0, h * np.log(np.where(h > 0, h, 1.0)), 0.0)
    integrand = (-hlog * P - 0.5 * Q) * a
    val = 0.25 * np.pi * integrate.simpson(integrand, x=t)
    return float(val + cp.M0**2 / (8 * np.pi))


# ---------------------------------------------------------------------------
# Rearrangement
# ---------------------------------------------------------------------------

def rearrange(field: PolarField, M: int | None = None, tol: float = 1e-10):
    """Symmetric decreasing rearrangement on the field's radial grid.

    Collocation values carry the cell areas (2 pi / M) w_i; sorting them gives
    the exact distribution function of that discrete measure.  Node i of the
    output takes the average of the sorted step function over the annulus
    between the midpoints to its neighbours, so the output is nonincreasing
    and conserves the annulus-sum mass.  On midpoint_r grids the annuli are
    the quadrature cells: mass is then conserved to round-off and decreasing
    radial fields come back unchanged.
    """
    g = field.grid
    K = field.K
    if M is None:
        M = max(64, 4 * K + 4)
    _, vals = field.to_collocation(M)
    if np.min(vals) < -tol * max(1.0, np.max(np.abs(vals))):
        raise ValueError("rearrangement needs a nonnegative field")
    vals = np.maximum(vals, 0.0)
    area = np.broadcast_to(g.quad_weights * (2 * np.pi / M), vals.shape).ravel()
    v = vals.ravel()
    order = np.argsort(-v, kind="stable")
    a_sorted = area[order]
    cum_a = np.concatenate([[0.0], np.cumsum(a_sorted)])
    cum_m = np.concatenate([[0.0], np.cumsum(a_sorted * v[order])])
    r = g.nodes
    rf = np.concatenate([[0.0], 0.5 * (r[1:] + r[:-1]), [r[-1] + 0.5 * (r[-1] - r[-2])]])
    edges = np.pi * rf**2
    node_area = np.diff(edges)
    mass_at = np.interp(edges, cum_a, cum_m)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(node_area > 0, np.diff(mass_at) / np.where(node_area > 0, node_area, 1.0), 0.0)
    if node_area[0] == 0:
        out[0] = v[order[0]]
    return out


# ---------------------------------------------------------------------------
# Entropies
# ---------------------------------------------------------------------------

@dataclass
class EntropyFunction:
    kind: str
    kappa: float | None
    phi: Callable
    phi_prime: Callable  # phi' = d phi / d w, kept for Newton-type use
    Phi: Callable
    coeff_log: float  # c in phi(w) ~ c log(1/w) as w -> 0 (0 if sublogarithmic)
    coeff_log_inf: float  # C3 candidate: -Phi(w) / (w log w) as w -> inf (inf if superlinear)
    scale_mass: float | None = None  # mass at which F is invariant under w -> l^2 w(l x)
    notes: str = ""
    phi_log: Callable | None = None  # phi as a function of log w, safe where w underflows

    def phi_of_log(self, logw):
        if self.phi_log is not None:
            return self.phi_log(logw)
        return self.phi(np.exp(logw))

    def hyp_constants(self, M: float, n: int = 400):
        """(C1, C2, C3) for the growth bounds of Phi at mass M."""
        C2 = self.coeff_log
        C3 = self.coeff_log_inf
        lo = M * np.geomspace(1e-12, 1.0, n)
        c1a = np.max((self.Phi(lo) - C2 * lo * np.log(M / lo)) / lo)
        hi = M * np.geomspace(1.0, 1e6, n)
        C3v = C3 if np.isfinite(C3) else 8 * M / (8 * np.pi) + 1.0
        c1b = np.max((self.Phi(hi) + C3v * hi * np.log(hi / M)) / hi)
        return float(max(c1a, c1b)), float(C2), float(C3)

    def admissibility(self, M: float, rtol: float = 1e-12) -> str:
        """'admissible', 'borderline' (an equality in the growth bounds) or 'violated'."""
        _, C2, C3 = self.hyp_constants(M)
        t = M / (8 * np.pi)
        if C2 < t * (1 - rtol) and C3 > t * (1 + rtol):
            return "admissible"
        if C2 <= t * (1 + rtol) and C3 >= t * (1 - rtol):
            return "borderline"
        return "violated"


def _gaussian_entropy():
    c0 = 2 * LN2 - EULER_GAMMA

    def phi(w):
        w = np.asarray(w, dtype=float)
        return c0 + ein(np.log(1.0 / w))

    def Phi(w):
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        pos = w > 0
        t = np.log(1.0 / w[pos])
        tt = np.where(np.abs(t) < 1e-8, 1e-8, t)
        # Ei(-2t) - Ei(-t) -> log 2 as t -> 0
        diff = special.expi(-2 * tt) - special.expi(-tt)
        out[pos] = (c0 + ein(t)) * w[pos] + diff
        return out

    def dphi(w):
        w = np.asarray(w, dtype=float)
        t = np.log(1.0 / w)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(np.abs(t) > 1e-12, -(1 - w) / (t * w), -1.0)

    return EntropyFunction("gaussian", None, phi, dphi, Phi, 0.0, np.inf, None,
                           "phi ~ log log(1/w) as w -> 0", lambda lw: c0 + ein(-np.asarray(lw)))


def _kappa_entropy(kappa: float):
    prof = make_profile("algebraic", kappa=kappa)
    c = 1.0 / (4 * kappa * (kappa - 1))
    if kappa == 2.0:
        def phi(w):
            return np.log(1.0 / np.asarray(w, dtype=float)) / 8

        def Phi(w):
            w = np.asarray(w, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(w > 0, w / 8 * (1 + np.log(1.0 / np.where(w > 0, w, 1.0))), 0.0)

        def dphi(w):
            return -1.0 / (8 * np.asarray(w, dtype=float))

        return EntropyFunction("algebraic_kappa", kappa, phi, dphi, Phi, c, 1 / 8, np.pi,
                               phi_log=lambda lw: -np.asarray(lw) / 8)
    if kappa == 3.0:
        def phi(w):
            w = np.asarray(w, dtype=float)
            return np.log(1.0 / w) / 24 - np.cbrt(w) / 8

        def Phi(w):
            w = np.asarray(w, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                lg = np.where(w > 0, np.log(1.0 / np.where(w > 0, w, 1.0)), 0.0)
            return w / 24 * (1 + lg) - 3 / 32 * w ** (4 / 3)

        def dphi(w):
            w = np.asarray(w, dtype=float)
            return -1 / (24 * w) - 1 / (24 * np.cbrt(w) ** 2)

        return EntropyFunction("algebraic_kappa", kappa, phi, dphi, Phi, c, np.inf, None,
                               phi_log=lambda lw: -np.asarray(lw) / 24 - np.exp(np.asarray(lw) / 3) / 8)

    # general kappa: phi(w(r)) = psi(r) for w <= 1; above the peak value the
    # continuation phi(1) - c log w - (w - 1) keeps Phi superlinearly negative
    p1 = float(prof.stream(0.0))

    def phi(w):
        w = np.asarray(w, dtype=float)
        inside = np.clip(w, 1e-300, 1.0)
        val = prof.stream(prof.omega_inverse(inside))
        big = np.maximum(w, 1.0)
        return np.where(w <= 1.0, val, p1 - c * np.log(big) - (big - 1.0))

    def Phi(w):
        w = np.asarray(w, dtype=float)
        # int_0^w phi = w int_0^inf phi(w e^-t) e^-t dt  (Gauss-Laguerre)
        ws = np.where(w > 0, w, 1.0)
        pts = ws[..., None] * np.exp(-_LAG_X)
        return np.where(w > 0, ws * np.sum(_LAG_W * phi(pts), axis=-1), 0.0)

    def dphi(w):
        w = np.asarray(w, dtype=float)
        r = prof.omega_inverse(np.clip(w, 1e-300, 1.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            d = prof.psi_prime(r) / prof.omega_prime(r)
        return np.where(w < 1.0, d, -c / w - 1.0)

    return EntropyFunction("algebraic_kappa", kappa, phi, dphi, Phi, c, np.inf, None,
                           "continued by phi(1) - c log w - (w - 1) above the peak value")


def entropy_catalog(kind: str, kappa: float | None = None) -> EntropyFunction:
    """Entropies whose critical points are the catalog vortices (amplitude 1)."""
    if kind == "gaussian":
        return _gaussian_entropy()
    if kind in ("algebraic", "algebraic_kappa"):
        if kappa is None or not kappa > 1:
            raise ValueError("algebraic entropy needs kappa > 1")
        return _kappa_entropy(float(kappa))
    raise ValueError(f"unknown entropy kind {kind!r}")


# ---------------------------------------------------------------------------
# Free energy and log-HLS
# ---------------------------------------------------------------------------

def _is_radial(field: PolarField) -> bool:
    return not np.any(field.coeffs[np.arange(field.coeffs.shape[0]) != field.K])


def entropy_integral(field: PolarField, entropy: EntropyFunction, M: int | None = None) -> float:
    g = field.grid
    if _is_radial(field):
        return float(2 * np.pi * g.integrate(entropy.Phi(np.maximum(field.mode(0).real, 0.0))))
    if M is None:
        M = max(64, 4 * field.K + 4)
    _, vals = field.to_collocation(M)
    return float((2 * np.pi / M) * np.sum(g.integrate(entropy.Phi(np.maximum(vals, 0.0)))))


def free_energy(field: PolarField, entropy: EntropyFunction) -> float:
    """F = E + int Phi(w) dx; -inf if the entropy integral diverges."""
    S = entropy_integral(field, entropy)
    if not np.isfinite(S):
        return -np.inf
    return energy_modes(field) + S


def _wlog(vals, Mtot):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(vals > 0, vals * np.log(Mtot / np.where(vals > 0, vals, 1.0)), 0.0)


def log_hls_gap(field: PolarField) -> float:
    """M^2 (1 + log pi)/(8 pi) - E - (M/8 pi) int w log(M/w) dx (>= 0)."""
    g = field.grid
    if _is_radial(field):
        w = field.mode(0).real
        Mtot = 2 * np.pi * g.integrate(w)
        if not Mtot > 0:
            raise ValueError("log-HLS gap needs positive mass")
        ent = 2 * np.pi * g.integrate(_wlog(w, Mtot))
    else:
        Mc = max(64, 4 * field.K + 4)
        _, vals = field.to_collocation(Mc)
        Mtot = (2 * np.pi / Mc) * np.sum(g.integrate(vals))
        if not Mtot > 0:
            raise ValueError("log-HLS gap needs positive mass")
        ent = (2 * np.pi / Mc) * np.sum(g.integrate(_wlog(vals, Mtot)))
    E = energy_modes(field)
    return float(Mtot**2 * (1 + np.log(np.pi)) / (8 * np.pi) - E - Mtot / (8 * np.pi) * ent)


# ---------------------------------------------------------------------------
# Free-energy maximisation over radial profiles
# ---------------------------------------------------------------------------

@dataclass
class MaximizerResult:
    r: np.ndarray
    omega: np.ndarray
    psi: np.ndarray
    residual: np.ndarray
    F: float
    E: float
    S: float
    M: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    gauge_lambda: float = 1.0
    multiplier: float = 0.0
    admissibility: str = ""

    def summary(self) -> dict:
        return {"F": self.F, "E": self.E, "S": self.S, "M": self.M, "iterations": self.iterations,
                "converged": self.converged, "gauge_lambda": self.gauge_lambda,
                "multiplier": self.multiplier, "admissibility": self.admissibility}


def _radial_F(w, grid, entropy):
    E = energy_radial(w, grid)
    S = 2 * np.pi * grid.integrate(entropy.Phi(w))
    return E + S, E, S


def _renorm(logw, grid, M):
    w = np.exp(logw - np.max(logw))
    return logw + np.log(M / (2 * np.pi * grid.integrate(w))) - np.max(logw)


def _multiplier(logw, psi, entropy, grid):
    # mass-weighted mean of phi(w) - psi
    w = np.exp(logw)
    res = entropy.phi_of_log(logw) - psi
    return float(grid.integrate(res * w) / grid.integrate(w))


def _rescale_radial(logw, grid, lam):
    """log of lam^2 w(lam r), by interpolation in log r."""
    r = grid.nodes
    lr = np.log(np.maximum(r, 1e-300))
    x = np.log(np.maximum(lam * r, 1e-300))
    out = np.interp(x, lr, logw, left=logw[0])
    # linear extrapolation in log r past the last node
    past = x > lr[-1]
    if np.any(past):
        slope = (logw[-1] - logw[-2]) / (lr[-1] - lr[-2])
        out[past] = logw[-1] + slope * (x[past] - lr[-1])
    return out + 2 * np.log(lam)


def maximize_free_energy(entropy: EntropyFunction, M: float, grid: RadialGrid, seed: int = 0,
                         max_iter: int = 10000, rtol: float = 1e-10, eta0: float = 1.0,
                         init=None, allow_borderline: bool = True) -> MaximizerResult:
    """Monotone ascent of F = E + S over radial profiles of mass M.

    The update is multiplicative, log w <- log w + eta (phi(w) - psi), followed
    by mass renormalisation; eta is halved whenever F would decrease. Radial
    profiles stay positive and, for concave Phi, nonincreasing. When F is
    invariant under w -> l^2 w(l x) the scale is fixed at the end by removing
    the Lagrange multiplier of the mass constraint.
    """
    verdict = entropy.admissibility(M)
    if verdict == "violated" or (verdict == "borderline" and not allow_borderline):
        raise ValueError(f"entropy growth bounds fail at mass M = {M} ({verdict})")
    rng = np.random.default_rng(seed)
    r = grid.nodes
    if init is None:
        a = rng.uniform(0.5, 2.0)
        logw = -rng.uniform(2.0, 3.0) * np.log1p(a * r * r)
    else:
        logw = np.log(np.maximum(np.asarray(init, dtype=float), 1e-300))
    logw = _renorm(logw, grid, M)
    w = np.exp(logw)
    F, E, S = _radial_F(w, grid, entropy)
    hist = [F]
    eta = eta0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        psi = stream_radial(w, grid)
        d = entropy.phi_of_log(logw) - psi  # dF/dw with dE/dw = -psi
        d -= grid.integrate(d * w) / grid.integrate(w)
        while True:
            cand = _renorm(logw + eta * d, grid, M)
            wc = np.exp(cand)
            Fc, Ec, Sc = _radial_F(wc, grid, entropy)
            if np.isfinite(Fc) and Fc >= F:
                break
            eta *= 0.5
            if eta < 1e-14:
                break
        if not (np.isfinite(Fc) and Fc >= F):
            converged = True  # no ascent direction left at machine precision
            break
        gain = Fc - F
        logw, w, F, E, S = cand, wc, Fc, Ec, Sc
        hist.append(F)
        eta = min(2 * eta, 8.0)
        if not np.isfinite(F) or abs(F) > 1e12:
            raise RuntimeError("free energy diverges: bad entropy/mass pair")
        if gain <= rtol * max(1.0, abs(F)):
            converged = True
            break
    lam = 1.0
    psi = stream_radial(w, grid)
    mult = _multiplier(logw, psi, entropy, grid)
    if entropy.scale_mass is not None and abs(M - entropy.scale_mass) < 1e-9 * M:
        # F is flat along w -> l^2 w(l x); pick the member with zero multiplier
        # (phi(w) = psi with the log-max normalisation of psi).  Rescaling by l
        # shifts the multiplier by (M/2pi - 2c) log l for phi ~ c log(1/w).
        rate = M / (2 * np.pi) - 2 * entropy.coeff_log
        for _ in range(20):
            if abs(mult) < 1e-12:
                break
            step = np.exp(-mult / rate)
            logw = _renorm(_rescale_radial(logw, grid, step), grid, M)
            lam *= step
            w = np.exp(logw)
            psi = stream_radial(w, grid)
            mult = _multiplier(logw, psi, entropy, grid)
        # not appended to the history: this moves along a level set of F and
        # only quadrature error changes the value
        F, E, S = _radial_F(w, grid, entropy)
    residual = entropy.phi_of_log(logw) - psi
    return MaximizerResult(r.copy(), w, psi, residual, float(F), float(E), float(S), float(M), it, converged,
                           hist, float(lam), float(mult), verdict)
