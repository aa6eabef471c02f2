"""Radial vortex profiles and the weights derived from them.

Every profile exposes the vorticity w(r), the angular-velocity stream
derivative psi'(r) = (1/r) int_0^r s w(s) ds, the weight A = -psi'/w', its
half-log chi, and the potential V = chi'' - chi'/r + chi'^2.  Closed forms are
used for the Gaussian and algebraic families; the origin is handled with short
Taylor series in s = r^2/4 because every ratio there is 0/0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

# below this value of s = r^2/4 the Taylor branches take over
SERIES_S = 1e-3
EULER_GAMMA = float(np.euler_gamma)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


def _asarray(r):
    return np.asarray(r, dtype=float)


def ein(z):
    """Entire exponential integral Ein(z) = int_0^z (1 - e^-t)/t dt."""
    z = _asarray(z)
    out = np.empty_like(z)
    small = np.abs(z) < 1.0
    zs = z[small]
    term = zs.copy()
    acc = zs.copy()
    for k in range(2, 30):
        term = -term * zs * (k - 1) / (k * k)
        acc = acc + term
    out[small] = acc
    zl = z[~small]
    with np.errstate(over="ignore"):
        pos = zl > 0
        val = np.empty_like(zl)
        val[pos] = EULER_GAMMA + np.log(zl[pos]) + special.exp1(zl[pos])
        # negative arguments: Ein(z) = gamma + log|z| - Ei(-z)
        val[~pos] = EULER_GAMMA + np.log(-zl[~pos]) - special.expi(-zl[~pos])
    out[~small] = val
    return out


def _q(s):
    """1/(e^s - 1) without overflow."""
    with np.errstate(divide="ignore"):
        return np.exp(-s) / (-np.expm1(-s))


def _split(r):
    r = _asarray(r)
    s = 0.25 * r * r
    return r, s, s < SERIES_S


@dataclass(frozen=True)
class VortexProfile:
    """Base class; concrete families override the evaluation methods."""

    kind: str
    kappa: float | None = None
    amplitude: float = 1.0
    beta: float = np.inf

    # -- required by subclasses ------------------------------------------
    def omega_star(self, r):
        raise NotImplementedError

    def omega_prime(self, r):
        raise NotImplementedError

    def omega_second0(self) -> float:
        raise NotImplementedError

    def psi_prime(self, r):
        raise NotImplementedError

    def weight_A(self, r):
        raise NotImplementedError

    def weight_A_prime(self, r):
        raise NotImplementedError

    def potential_V(self, r):
        raise NotImplementedError

    def stream(self, r):
        """Stream function psi(r) = int_0^inf log(max(r,s)) w(s) s ds."""
        raise NotImplementedError

    def omega_inverse(self, a):
        raise NotImplementedError

    @property
    def mass(self) -> float:
        raise NotImplementedError

    # -- shared ----------------------------------------------------------
    def chi(self, r):
        return 0.5 * np.log(self.weight_A(r))

    def A0(self) -> float:
        return -self.omega_star(0.0) / (2.0 * self.omega_second0())

    def describe(self) -> dict:
        return {"kind": self.kind, "kappa": self.kappa, "amplitude": self.amplitude,
                "beta": None if not np.isfinite(self.beta) else self.beta}


@dataclass(frozen=True)
class GaussianProfile(VortexProfile):
    kind: str = "gaussian"

    def omega_star(self, r):
        r = _asarray(r)
        return self.amplitude * np.exp(-0.25 * r * r)

    def omega_prime(self, r):
        r = _asarray(r)
        return -0.5 * self.amplitude * r * np.exp(-0.25 * r * r)

    def omega_second0(self):
        return -0.5 * self.amplitude

    def psi_prime(self, r):
        r, s, sm = _split(r)
        out = np.empty_like(s)
        ss = s[sm]
        out[sm] = 0.5 * r[sm] * (1 - ss / 2 + ss**2 / 6 - ss**3 / 24)
        out[~sm] = -2.0 * np.expm1(-s[~sm]) / r[~sm]
        return self.amplitude * out

    def weight_A(self, r):
        r, s, sm = _split(r)
        out = np.empty_like(s)
        ss = s[sm]
        out[sm] = 1 + ss / 2 + ss**2 / 6 + ss**3 / 24
        with np.errstate(over="ignore"):
            out[~sm] = np.expm1(s[~sm]) / s[~sm]
        return out

    def chi(self, r):
        r, s, sm = _split(r)
        out = np.empty_like(s)
        ss = s[sm]
        out[sm] = 0.5 * np.log1p(ss / 2 + ss**2 / 6 + ss**3 / 24)
        sl = s[~sm]
        out[~sm] = 0.5 * (sl + np.log(-np.expm1(-sl)) - np.log(sl))
        return out

    def weight_A_prime(self, r):
        r, s, sm = _split(r)
        out = np.empty_like(s)
        ss = s[sm]
        out[sm] = 0.5 + ss / 3 + ss**2 / 8 + ss**3 / 30
        sl = s[~sm]
        with np.errstate(over="ignore", invalid="ignore"):
            out[~sm] = (np.exp(sl) * (sl - 1.0) + 1.0) / sl**2
        return 0.5 * r * out

    def potential_V(self, r):
        r, s, sm = _split(r)
        out = np.empty_like(s)
        ss = s[sm]
        out[sm] = 5 * ss / 48 + ss**2 / 48 - ss**3 / 2880
        sl = s[~sm]
        q = _q(sl)
        out[~sm] = 0.75 / sl - 0.5 + 0.25 * sl - 0.5 * q - 0.25 * sl * q * q
        return out

    def stream(self, r):
        r = _asarray(r)
        return self.amplitude * (2 * np.log(2.0) - EULER_GAMMA + ein(0.25 * r * r))

    def omega_inverse(self, a):
        a = _asarray(a)
        return np.sqrt(4.0 * np.log(self.amplitude / a))

    @property
    def mass(self):
        return 4.0 * np.pi * self.amplitude


@dataclass(frozen=True)
class AlgebraicProfile(VortexProfile):
    kind: str = "algebraic"

    @property
    def nu(self) -> float:
        return self.kappa - 1.0

    def omega_star(self, r):
        r = _asarray(r)
        return self.amplitude * (1 + r * r) ** (-self.kappa)

    def omega_prime(self, r):
        r = _asarray(r)
        k = self.kappa
        return -2 * k * self.amplitude * r * (1 + r * r) ** (-k - 1)

    def omega_second0(self):
        return -2 * self.kappa * self.amplitude

    def psi_prime(self, r):
        r = _asarray(r)
        x = r * r
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -np.expm1(-self.nu * np.log1p(x)) / (2 * self.nu * r)
        return self.amplitude * np.where(r > 0, out, 0.0)

    def _A_series(self):
        n = self.nu
        c0 = 1.0 / (4 * (n + 1))
        c1 = ((n + 1) * (n + 2) / 2 - 1) / (4 * n * (n + 1))
        c2 = (n + 2) / 24.0
        c3 = (n - 1) * (n + 2) / 96.0
        return c0, c1, c2, c3

    def weight_A(self, r):
        r = _asarray(r)
        x = r * r
        sm = x < 4 * SERIES_S
        out = np.empty_like(x)
        c0, c1, c2, c3 = self._A_series()
        xs = x[sm]
        out[sm] = c0 + c1 * xs + c2 * xs**2 + c3 * xs**3
        xl = x[~sm]
        k, n = self.kappa, self.nu
        with np.errstate(over="ignore"):
            out[~sm] = (1 + xl) ** 2 * np.expm1(n * np.log1p(xl)) / (4 * k * n * xl)
        return out

    def chi(self, r):
        r = _asarray(r)
        x = r * r
        sm = x < 4 * SERIES_S
        out = np.empty_like(x)
        out[sm] = 0.5 * np.log(self.weight_A(r[sm]))
        xl = x[~sm]
        k, n = self.kappa, self.nu
        lu = np.log1p(xl)
        # log expm1(y) = y + log(-expm1(-y))
        y = n * lu
        out[~sm] = 0.5 * (2 * lu + y + np.log(-np.expm1(-y)) - np.log(4 * k * n * xl))
        return out

    def weight_A_prime(self, r):
        r = _asarray(r)
        x = r * r
        sm = x < 4 * SERIES_S
        c0, c1, c2, c3 = self._A_series()
        dAdx = np.empty_like(x)
        xs = x[sm]
        dAdx[sm] = c1 + 2 * c2 * xs + 3 * c3 * xs**2
        xl = x[~sm]
        k, n = self.kappa, self.nu
        u = 1 + xl
        em = np.expm1(n * np.log1p(xl))
        num = (2 * u * em + n * u ** (n + 1)) * xl - u**2 * em
        dAdx[~sm] = num / (4 * k * n * xl**2)
        return 2 * r * dAdx

    def potential_V(self, r):
        r = _asarray(r)
        x = r * r
        n = self.nu
        sm = x < 4 * SERIES_S
        out = np.empty_like(x)
        xs = x[sm]
        c1 = 300 * n**2 + 360 * n - 660
        c2 = 60 * n**3 - 540 * n**2 - 780 * n + 1260
        c3 = -(n**4) - 150 * n**3 + 740 * n**2 + 1230 * n - 1819
        out[sm] = xs * (c1 + c2 * xs + c3 * xs**2) / 720.0
        xl = x[~sm]
        u = 1 + xl
        S = n * xl / np.expm1(n * np.log1p(xl))
        num = 3 - 2 * (n - 1) * xl + (n * n - 1) * xl**2 - 2 * S - S * S
        out[~sm] = num / (xl * u**2)
        return out

    def stream(self, r):
        r = _asarray(r)
        k, n = self.kappa, self.nu
        u = 1 + r * r
        if k == 2.0:
            val = 0.25 * np.log(u)
        elif k == 3.0:
            val = 0.125 * (np.log(u) - 1.0 / u)
        elif k == 1.5:
            val = np.log1p(np.sqrt(u))
        else:
            psi0 = -(EULER_GAMMA + special.digamma(n)) / (4 * n)
            L = np.log(u)[..., None]
            tau = 0.5 * L * (1 + _GL_X)
            with np.errstate(invalid="ignore", divide="ignore"):
                g = np.where(tau > 0, np.expm1(-n * tau) / np.expm1(-tau), n)
            val = psi0 + 0.5 * L[..., 0] * np.sum(g * _GL_W, axis=-1) / (4 * n)
        return self.amplitude * val

    def omega_inverse(self, a):
        a = _asarray(a)
        return np.sqrt(np.maximum((a / self.amplitude) ** (-1.0 / self.kappa) - 1.0, 0.0))

    @property
    def mass(self):
        return np.pi * self.amplitude / self.nu


@dataclass(frozen=True)
class CustomProfile(VortexProfile):
    """Sampled profile: monotone cubic interpolation in x = r^2."""

    kind: str = "custom"
    samples: tuple = field(default=(), repr=False)

    def __post_init__(self):
        r = np.asarray([p[0] for p in self.samples], dtype=float)
        w = np.asarray([p[1] for p in self.samples], dtype=float)
        x = r * r
        spline = PchipInterpolator(x, w, extrapolate=False)
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_w", w)
        object.__setattr__(self, "_sp", spline)
        object.__setattr__(self, "_dsp", spline.derivative())
        object.__setattr__(self, "_isp", spline.antiderivative())

    def _tail(self, x):
        # algebraic continuation w ~ r^-beta past the last sample
        xl, wl = self._x[-1], self._w[-1]
        return wl * (x / xl) ** (-0.5 * self.beta)

    def _omega_x(self, x):
        x = _asarray(x)
        inside = x <= self._x[-1]
        out = np.empty_like(x)
        out[inside] = self._sp(x[inside])
        out[~inside] = self._tail(x[~inside])
        return out

    def _domega_dx(self, x):
        x = _asarray(x)
        inside = x <= self._x[-1]
        out = np.empty_like(x)
        out[inside] = self._dsp(x[inside])
        out[~inside] = -0.5 * self.beta * self._tail(x[~inside]) / x[~inside]
        return out

    def _int_omega_dx(self, x):
        # int_0^x w(x') dx'
        x = _asarray(x)
        xl = self._x[-1]
        inside = x <= xl
        out = np.empty_like(x)
        out[inside] = self._isp(x[inside])
        total = float(self._isp(xl))
        p = 0.5 * self.beta
        xo = x[~inside]
        out[~inside] = total + self._w[-1] * xl / (1 - p) * ((xo / xl) ** (1 - p) - 1)
        return out

    def omega_star(self, r):
        r = _asarray(r)
        return self.amplitude * self._omega_x(r * r)

    def omega_prime(self, r):
        r = _asarray(r)
        return self.amplitude * 2 * r * self._domega_dx(r * r)

    def omega_second0(self):
        return self.amplitude * 2 * float(self._dsp(0.0))

    def psi_prime(self, r):
        r = _asarray(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 0.5 * self._int_omega_dx(r * r) / r
        return self.amplitude * np.where(r > 0, out, 0.0)

    def weight_A(self, r):
        r = _asarray(r)
        x = r * r
        d = self._domega_dx(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -self._int_omega_dx(x) / (4 * x * d)
        return np.where(x > 0, out, -self._w[0] / (4 * float(self._dsp(0.0))))

    def weight_A_prime(self, r):
        r = _asarray(r)
        h = 1e-5 * np.maximum(r, 1e-3)
        return (self.weight_A(r + h) - self.weight_A(np.abs(r - h))) / (2 * h)

    def potential_V(self, r):
        # V = 4x (chi_xx + chi_x^2); derivatives by central differences in x.
        # PCHIP data is only C^1, so this is piecewise smooth.
        r = _asarray(r)
        x = r * r
        h = 1e-4 * np.maximum(x, 1e-4)
        c = lambda y: 0.5 * np.log(self.weight_A(np.sqrt(y)))
        cp, c0, cm = c(x + h), c(x), c(np.maximum(x - h, 0.0))
        hm = x - np.maximum(x - h, 0.0)
        chi_x = (cp - cm) / (h + hm)
        chi_xx = 2 * (cp * hm - c0 * (h + hm) + cm * h) / (h * hm * (h + hm))
        return 4 * x * (chi_xx + chi_x**2)

    def stream(self, r):
        r = _asarray(r)
        # psi(r) = psi(0) + int_0^r psi'; psi(0) = int log(s) w s ds, both by Gauss quadrature
        edges = np.concatenate([[0.0], np.sqrt(self._x[1:]), [np.sqrt(self._x[-1]) * 1e3]])
        s_all, w_all = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            if b > 10 * max(a, 1.0):
                ta, tb = np.log(max(a, 1e-12)), np.log(b)
                t = 0.5 * (tb - ta) * (_GL_X + 1) + ta
                s_all.append(np.exp(t))
                w_all.append(0.5 * (tb - ta) * _GL_W * np.exp(t))
            else:
                s_all.append(0.5 * (b - a) * (_GL_X + 1) + a)
                w_all.append(0.5 * (b - a) * _GL_W)
        s = np.concatenate(s_all)
        w = np.concatenate(w_all)
        psi0 = np.sum(w * np.log(s) * self.omega_star(s) * s)
        out = np.empty_like(r)
        flat = out.reshape(-1)
        for i, ri in enumerate(r.reshape(-1)):
            t = 0.5 * ri * (_GL_X + 1)
            flat[i] = psi0 + 0.5 * ri * np.sum(_GL_W * self.psi_prime(t))
        return out

    def omega_inverse(self, a):
        a = _asarray(a)
        lo = np.zeros_like(a)
        hi = np.full_like(a, np.sqrt(self._x[-1]))
        while np.any(self.omega_star(hi) > a):
            hi = np.where(self.omega_star(hi) > a, 2 * hi, hi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            big = self.omega_star(mid) > a
            lo = np.where(big, mid, lo)
            hi = np.where(big, hi, mid)
        return 0.5 * (lo + hi)

    @property
    def mass(self):
        return float(np.pi * self.amplitude * self._int_omega_dx(np.array([1e12]))[0])


def make_profile(kind: str, params: dict | None = None, **kw) -> VortexProfile:
    """Build a profile from the catalog.

    kind: "gaussian", "algebraic" (needs kappa > 1) or "custom" (needs
    samples [[r, w], ...] starting at r = 0, strictly decreasing, plus beta).
    """
    p = dict(params or {})
    p.update(kw)
    amp = float(p.get("amplitude", 1.0))
    if amp <= 0:
        raise ValueError("amplitude must be positive")
    if kind == "gaussian":
        return GaussianProfile(amplitude=amp)
    if kind == "algebraic":
        if "kappa" not in p or p["kappa"] is None:
            raise ValueError("algebraic profile needs kappa")
        kappa = float(p["kappa"])
        if not kappa > 1.0:
            raise ValueError(f"algebraic profile needs kappa > 1, got {kappa}")
        return AlgebraicProfile(kappa=kappa, amplitude=amp, beta=2 * kappa)
    if kind == "custom":
        samples = p.get("samples")
        if not samples or len(samples) < 4:
            raise ValueError("custom profile needs at least 4 samples")
        arr = np.asarray(samples, dtype=float)
        if arr[0, 0] != 0.0:
            raise ValueError("custom samples must start at r = 0")
        if np.any(np.diff(arr[:, 0]) <= 0):
            raise ValueError("custom sample radii must be strictly increasing")
        if arr[0, 1] <= 0:
            raise ValueError("custom profile needs w(0) > 0")
        if np.any(np.diff(arr[:, 1]) >= 0):
            raise ValueError("custom samples must be strictly decreasing")
        beta = float(p.get("beta", 4.0))
        if not beta > 2:
            raise ValueError("custom profile needs beta > 2")
        return CustomProfile(amplitude=amp, beta=beta, samples=tuple(map(tuple, arr)))
    raise ValueError(f"unknown profile kind {kind!r}")


def profile_from_config(block: dict) -> VortexProfile:
    block = dict(block)
    kind = block.pop("kind", "gaussian")
    return make_profile(kind, block)


def eval_V(profile: VortexProfile, r):
    """Potential V(r); r must be strictly positive."""
    r = _asarray(r)
    if np.any(r <= 0):
        raise ValueError("V is defined for r > 0 only")
    return profile.potential_V(r)


# ---------------------------------------------------------------------------
# Gaussian extras
# ---------------------------------------------------------------------------

def _h_aux(s):
    """h(s) = 1/s - 1/(e^s - 1), with h(0) = 1/2."""
    s = _asarray(s)
    sm = s < SERIES_S
    out = np.empty_like(s)
    ss = s[sm]
    out[sm] = 0.5 - ss / 12 + ss**3 / 720
    out[~sm] = 1.0 / s[~sm] - _q(s[~sm])
    return out


def eval_gaussian_BW(r):
    """Closed-form B(r) and W(r) for the Gaussian profile (amplitude free)."""
    r, s, sm = _split(r)
    B = np.empty_like(s)
    W = np.empty_like(s)
    ss = s[sm]
    B[sm] = 7 / 4 + ss / 3 + 5 * ss**2 / 48 + ss**3 / 40
    W[sm] = -1.5 + 11 * ss / 16 - ss**2 / 16 - ss**3 / 576
    sl = s[~sm]
    with np.errstate(over="ignore", invalid="ignore"):
        B[~sm] = (np.exp(sl) * (1 + sl) - 1 - 2 * sl) / (2 * sl**2) + 1
    q = _q(sl)
    W[~sm] = sl / 4 - 0.5 - 1 / (4 * sl) - (sl - 0.5) * q - 0.25 * sl * q * q
    return B, W


def gaussian_B_over_A(r):
    """B/A = (1 + h(s))/2 + 1/A, evaluated without overflow."""
    r, s, _ = _split(r)
    A = GaussianProfile().weight_A(r)
    return 0.5 * (1 + _h_aux(s)) + 1.0 / A


def gaussian_Bm1_over_A(r):
    r, s, _ = _split(r)
    return 0.5 * (1 + _h_aux(s))


@dataclass(frozen=True)
class GaussianWeights:
    """B, W and their planar extensions for the Oseen profile."""

    def weight_B(self, r):
        return eval_gaussian_BW(r)[0]

    def potential_W(self, r):
        return eval_gaussian_BW(r)[1]

    def cal_A(self, x, y):
        return GaussianProfile().weight_A(np.hypot(x, y))

    def cal_B(self, x, y):
        return self.weight_B(np.hypot(x, y))


@dataclass(frozen=True)
class RescaledProfile(VortexProfile):
    """w_lam(r) = w(lam r); then A_lam(r) = A(lam r)/lam^2 and V_lam(r) = lam^2 V(lam r)."""

    base: VortexProfile | None = None
    lam: float = 1.0

    def __post_init__(self):
        if self.base is None or not self.lam > 0:
            raise ValueError("RescaledProfile needs a base profile and lam > 0")

    def omega_star(self, r):
        return self.base.omega_star(self.lam * _asarray(r))

    def omega_prime(self, r):
        return self.lam * self.base.omega_prime(self.lam * _asarray(r))

    def omega_second0(self):
        return self.lam**2 * self.base.omega_second0()

    def psi_prime(self, r):
        return self.base.psi_prime(self.lam * _asarray(r)) / self.lam

    def weight_A(self, r):
        return self.base.weight_A(self.lam * _asarray(r)) / self.lam**2

    def weight_A_prime(self, r):
        return self.base.weight_A_prime(self.lam * _asarray(r)) / self.lam

    def potential_V(self, r):
        return self.lam**2 * self.base.potential_V(self.lam * _asarray(r))

    def stream(self, r):
        # psi_lam(r) = lam^-2 (psi(lam r) - M log(lam) / (2 pi))
        return (self.base.stream(self.lam * _asarray(r)) - self.base.mass * np.log(self.lam) / (2 * np.pi)) / self.lam**2

    def omega_inverse(self, a):
        return self.base.omega_inverse(a) / self.lam

    @property
    def mass(self):
        return self.base.mass / self.lam**2


def rescale(profile: VortexProfile, lam: float) -> RescaledProfile:
    return RescaledProfile(kind=profile.kind, kappa=profile.kappa, amplitude=profile.amplitude,
                           beta=profile.beta, base=profile, lam=float(lam))
