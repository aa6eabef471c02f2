"""Quadratic forms J, Q, the cubic term N, and the coercivity constants."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .grid import PolarField, RadialGrid, make_grid, project_constraints
from .profiles import GaussianProfile, VortexProfile, eval_gaussian_BW
from . import energy as _energy
from . import spectral

# 8th-order central first-derivative stencil
_FD8 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def radial_derivative(f, grid: RadialGrid, parity: int = 0):
    """d f / dr on the grid.

    Uniform grids starting at the origin use an 8th-order central stencil with
    ghost values f(-r) = (-1)^parity f(r) and zero padding past r_max; other
    mappings fall back to second-order np.gradient.
    """
    f = np.asarray(f)
    r = grid.nodes
    if grid.mapping == "uniform_r" and r[0] == 0.0:
        h = r[1] - r[0]
        sign = -1.0 if parity % 2 else 1.0
        ext = np.concatenate([sign * f[4:0:-1], f, np.zeros(4, dtype=f.dtype)])
        out = np.zeros_like(f)
        for j, c in enumerate(_FD8):
            if c != 0.0:
                out = out + c * ext[j:j + f.size]
        return out / h
    if np.iscomplexobj(f):
        return np.gradient(f.real, r, edge_order=2) + 1j * np.gradient(f.imag, r, edge_order=2)
    return np.gradient(f, r, edge_order=2)


def _centrifugal(w, dw, r, k):
    """k^2 |w|^2 / r^2 with its limit at the origin."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, k * k * np.abs(w) ** 2 / np.where(r > 0, r, 1.0) ** 2, 0.0)
    if k != 0 and r[0] == 0:
        out[0] = np.abs(dw[0]) ** 2 if abs(k) == 1 else 0.0
    return out


# ---------------------------------------------------------------------------
# J
# ---------------------------------------------------------------------------

def x_norm(field: PolarField, profile: VortexProfile) -> float:
    """int A w^2 dx."""
    val = field.x_norm_sq(profile)
    if not np.isfinite(val):
        raise ValueError("field has infinite weighted norm")
    return val


def j_form(field: PolarField, profile: VortexProfile) -> float:
    """J = (1/2) int A w^2 dx - E(w)."""
    return 0.5 * x_norm(field, profile) - _energy.energy_modes(field)


def j_form_modes(field: PolarField, profile: VortexProfile) -> dict:
    """Per-|k| contributions to J (k and -k combined)."""
    g = field.grid
    A = profile.weight_A(g.nodes)
    out = {}
    for k in range(0, field.K + 1):
        if k == 0:
            w = field.mode(0).real
            out[0] = np.pi * g.integrate(A * w * w) - _energy.energy_radial(w, g)
        else:
            acc = 0.0
            for kk in (k, -k):
                w = field.mode(kk)
                acc += np.pi * (g.integrate(A * np.abs(w) ** 2)
                                - g.integrate(spectral.bk_apply(k, w, g) * np.conj(w)).real)
            out[k] = acc
    return out


# ---------------------------------------------------------------------------
# Q and the gradient norm
# ---------------------------------------------------------------------------

def _gaussian_AB(r):
    return GaussianProfile().weight_A(r), eval_gaussian_BW(r)[0]


def grad_norm(field: PolarField, profile: VortexProfile | None = None) -> float:
    """int A |grad w|^2 dx."""
    g = field.grid
    r = g.nodes
    A = _gaussian_AB(r)[0] if profile is None else profile.weight_A(r)
    acc = 0.0
    for k in field.ks:
        w = field.mode(k)
        dw = radial_derivative(w, g, parity=abs(k) % 2)
        acc += g.integrate(A * (np.abs(dw) ** 2 + _centrifugal(w, dw, r, k)))
    return float(2 * np.pi * acc)


def q_form(field: PolarField) -> float:
    """Q = int (A |grad w|^2 - B w^2) dx for the Oseen weights."""
    g = field.grid
    r = g.nodes
    A, B = _gaussian_AB(r)
    acc = 0.0
    for k in field.ks:
        w = field.mode(k)
        dw = radial_derivative(w, g, parity=abs(k) % 2)
        acc += g.integrate(A * (np.abs(dw) ** 2 + _centrifugal(w, dw, r, k)) - B * np.abs(w) ** 2)
    return float(2 * np.pi * acc)


def q_form_lk(field: PolarField) -> float:
    """Q through the L_k forms of w_k = A^{1/2} w_k."""
    g = field.grid
    sA = np.sqrt(GaussianProfile().weight_A(g.nodes))
    return float(sum(spectral.lk_quadratic_form(k, sA * field.mode(k), g) for k in field.ks))


# ---------------------------------------------------------------------------
# N
# ---------------------------------------------------------------------------

def stream_modes(field: PolarField) -> np.ndarray:
    """psi_k with Laplacian psi = w: psi_k = -B_k[w_k] for k != 0.

    The k = 0 row holds psi_0 = int log max(r, s) w_0 s ds.
    """
    g = field.grid
    out = np.zeros_like(field.coeffs)
    for k in field.ks:
        if k == 0:
            out[field.K] = _energy.stream_radial(field.mode(0).real, g)
        elif k > 0:
            out[field.K + k] = -spectral.bk_apply(k, field.mode(k), g)
            out[field.K - k] = np.conj(out[field.K + k])
    return out


def n_form(field: PolarField, profile: VortexProfile | None = None, M: int | None = None) -> float:
    """N = (1/2) int {A, psi} w^2 dx = (1/2) int (A'/r) psi_theta w^2 dx.

    The triple product is exact in theta when the collocation grid has at
    least 3K + 1 points.
    """
    if profile is None:
        profile = GaussianProfile()
    K = field.K
    need = 3 * K + 1
    if M is None:
        M = need
    if M < need:
        raise ValueError(f"angular grid of {M} points cannot hold the cubic product (need {need})")
    g = field.grid
    r = g.nodes
    psi = stream_modes(field)
    dpsi = psi * (1j * field.ks)[:, None]
    _, w = field.to_collocation(M)
    _, pt = PolarField(g, dpsi).to_collocation(M)
    with np.errstate(divide="ignore", invalid="ignore"):
        ar = np.where(r > 0, profile.weight_A_prime(r) / np.where(r > 0, r, 1.0), 0.0)
    if r[0] == 0:
        ar[0] = profile.weight_A_prime(np.array([1e-6]))[0] / 1e-6
    dens = np.mean(pt * w * w, axis=0) * 2 * np.pi
    return float(0.5 * g.integrate(ar * dens))


# ---------------------------------------------------------------------------
# Coercivity constants
# ---------------------------------------------------------------------------

@dataclass
class GammaEstimate:
    gamma: float
    gamma_nonradial: float
    gamma_radial: float
    C_H: float
    C1_prime: float
    radial_coercive: bool
    sector: str

    def to_json(self):
        return asdict(self)


def hardy_grid(N: int = 2048) -> RadialGrid:
    return make_grid(N, 1e4, "log_r", r_min=1e-4)


def gamma_estimate(profile: VortexProfile, grid: RadialGrid, hgrid: RadialGrid | None = None) -> GammaEstimate:
    """gamma = min(1/2, 1 - C1', 1 - C_H), restricted to the non-radial sector if C_H >= 1."""
    bt = spectral.btilde1_spectrum(profile, grid, nev=2, check=False)
    c1p = bt.derived["C1_prime"]
    g_nr = min(0.5, 1.0 - c1p)
    hc = spectral.hardy_constant(profile, hgrid or hardy_grid(), check=False)
    CH = hc.derived["C_H"]
    g_rad = 1.0 - CH
    if abs(g_rad) < 1e-3:
        # C_H = 1 up to discretisation error: borderline, not coercive
        g_rad = 0.0
    coercive = g_rad > 0
    if coercive:
        return GammaEstimate(min(g_nr, g_rad), g_nr, g_rad, CH, c1p, True, "full")
    return GammaEstimate(g_nr, g_nr, g_rad, CH, c1p, False, "nonradial_only")


def delta_estimate(grid: RadialGrid) -> float:
    return spectral.delta_chain(grid)["delta"]


@dataclass
class FormValues:
    J: float
    Q: float | None
    N: float | None
    gamma: float | None
    delta: float | None
    x_norm_sq: float
    grad_norm_sq: float

    def to_json(self):
        return asdict(self)


def evaluate_forms(field: PolarField, profile: VortexProfile, gamma=None, delta=None) -> FormValues:
    gauss = profile.kind == "gaussian"
    return FormValues(
        J=j_form(field, profile),
        Q=q_form(field) if gauss else None,
        N=n_form(field, profile),
        gamma=gamma, delta=delta,
        x_norm_sq=x_norm(field, profile),
        grad_norm_sq=grad_norm(field, profile),
    )


# ---------------------------------------------------------------------------
# Seeded random fields
# ---------------------------------------------------------------------------

def random_field(grid: RadialGrid, rng, K: int = 4, degree: int = 4, radial: bool = True,
                 width=(0.8, 1.5)) -> PolarField:
    """Band-limited random field: w_k = r^|k| e^{-a s} P_k(s), s = r^2/4.

    P_k has random coefficients scaled by 1/j!; the envelope rate a is drawn
    from `width` and the mode amplitude decays like 1/(1 + |k|).
    """
    rng = np.random.default_rng(rng)
    r = grid.nodes
    s = r * r / 4
    fact = np.cumprod(np.concatenate([[1.0], np.arange(1, degree + 1)]))
    c = np.zeros((2 * K + 1, grid.N), dtype=complex)
    for k in range(0 if radial else 1, K + 1):
        a = rng.uniform(*width)
        coef = (rng.normal(size=degree + 1) + (1j * rng.normal(size=degree + 1) if k else 0)) / fact
        P = np.polynomial.polynomial.polyval(s, coef)
        c[K + k] = r**k * np.exp(-a * s) * P / (1 + k)
    return PolarField(grid, c)


def sample_fields(grid: RadialGrid, n: int, seed: int, which, profile: VortexProfile, radial: bool = True,
                  K: int = 4):
    """n seeded random fields projected onto the chosen constraint subspace."""
    rng = np.random.default_rng(seed)
    for _ in range(n):
        f = random_field(grid, rng, K=K, radial=radial)
        if which:
            f = project_constraints(f, which, profile)
        yield f


def fit_C0(fields, profile: VortexProfile) -> float:
    """Empirical constant in |N| <= C0 x (x^{1/2} + g^{1/2}), doubled for safety."""
    best = 0.0
    for f in fields:
        x = x_norm(f, profile)
        gn = grad_norm(f, profile)
        if x <= 0:
            continue
        best = max(best, abs(n_form(f, profile)) / (x * (np.sqrt(x) + np.sqrt(gn))))
    return 2.0 * best
