"""Radial grids, quadrature, polar fields and constraint projections."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

MAPPINGS = ("uniform_r", "log_r", "uniform_s", "midpoint_r")
DEFAULT_KMAX = 16
DEFAULT_RMIN = 1e-6


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights on n equispaced nodes (3/8 rule closes odd counts)."""
    if n < 4:
        raise ValueError("need at least 4 nodes")
    w = np.zeros(n)
    m = n - 1
    if m % 2 == 0:
        w[0:m:2] += 1
        w[1:m:2] += 4
        w[2:m + 1:2] += 1
        w *= h / 3
    else:
        k = m - 3
        w[0:k:2] += 1
        w[1:k:2] += 4
        w[2:k + 1:2] += 1
        w *= h / 3
        w[k:k + 4] += 3 * h / 8 * np.array([1.0, 3.0, 3.0, 1.0])
    return w


def gregory_weights(n: int, h: float, order: int = 8) -> np.ndarray:
    """Trapezoid weights with Gregory end corrections, exact for polynomials of degree < order.

    The corrections cancel the Euler-Maclaurin end terms through h^order; all
    weights stay positive for order <= 8.
    """
    if n < 2 * order:
        raise ValueError(f"need at least {2 * order} nodes")
    B = special.bernoulli(order + 1)
    e = np.array([-B[q + 1] / (q + 1) if q % 2 else 0.0 for q in range(order)])
    j = np.arange(order, dtype=float)
    c = np.linalg.solve(np.vander(j, order, increasing=True).T, e)
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    w[:order] -= c
    w[n - order:] -= c[::-1]
    return w * h


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    quad_weights: np.ndarray
    r_max: float
    mapping: str
    K_max: int = DEFAULT_KMAX
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return self.nodes.shape[0]

    @property
    def r(self) -> np.ndarray:
        return self.nodes

    @property
    def dr_min(self) -> float:
        return float(np.min(np.diff(self.nodes)))

    def integrate(self, f) -> float:
        """Approximate int_0^r_max f(r) r dr."""
        return np.sum(self.quad_weights * f, axis=-1)

    def refined(self, factor: int = 2) -> "RadialGrid":
        """Same mapping and extent with factor times as many intervals."""
        n = self.N
        if self.mapping == "midpoint_r":
            n2 = factor * n
        else:
            n2 = factor * (n - 1) + 1
        r_min = self.nodes[0] if self.mapping == "log_r" else None
        return make_grid(n2, self.r_max, self.mapping, K_max=self.K_max, r_min=r_min)

    def cell_geometry(self):
        """Gauss points and cubic interpolation weights used by the B_k sweeps."""
        if "cells" in self._cache:
            return self._cache["cells"]
        r = self.nodes
        n = r.shape[0]
        gx, gwt = np.polynomial.legendre.leggauss(6)
        a, b = r[:-1], r[1:]
        sq = 0.5 * (b - a)[:, None] * (gx[None, :] + 1) + a[:, None]
        gw = 0.5 * (b - a)[:, None] * gwt[None, :]
        st = np.clip(np.arange(n - 1) - 1, 0, n - 4).astype(np.int64)
        idx = st[:, None] + np.arange(4)[None, :]
        xs = r[idx]  # (n-1, 4)
        lw = np.ones(sq.shape + (4,))
        for m in range(4):
            for j in range(4):
                if j != m:
                    lw[:, :, m] *= (sq - xs[:, j, None]) / (xs[:, m, None] - xs[:, j, None])
        out = (np.ascontiguousarray(sq), np.ascontiguousarray(gw), np.ascontiguousarray(lw), st)
        self._cache["cells"] = out
        return out

    def to_json(self) -> dict:
        return {"N": int(self.N), "r_max": float(self.r_max), "mapping": self.mapping,
                "K_max": int(self.K_max)}


def make_grid(N: int, r_max: float, mapping: str = "uniform_r", K_max: int = DEFAULT_KMAX,
              r_min: float | None = None) -> RadialGrid:
    """Nodes and quadrature weights for int f(r) r dr.

    uniform_r   nodes i*r_max/(N-1), first node at the origin
    log_r       geometric nodes between r_min and r_max
    uniform_s   nodes evenly spaced in s = r^2/4, Gregory weights in s
    midpoint_r  cell centres (i+1/2) r_max/N with midpoint weights
    """
    N = int(N)
    if N < 16:
        raise ValueError(f"grid needs N >= 16, got {N}")
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    if mapping not in MAPPINGS:
        raise ValueError(f"unknown mapping {mapping!r}")
    if K_max < 0:
        raise ValueError("K_max must be nonnegative")
    if mapping == "uniform_r":
        h = r_max / (N - 1)
        r = h * np.arange(N)
        w = simpson_weights(N, h) * r
    elif mapping == "log_r":
        r0 = DEFAULT_RMIN if r_min is None else float(r_min)
        if not 0 < r0 < r_max:
            raise ValueError("log_r grid needs 0 < r_min < r_max")
        x = np.linspace(np.log(r0), np.log(r_max), N)
        r = np.exp(x)
        w = simpson_weights(N, x[1] - x[0]) * r * r
        w[0] += 0.5 * r0 * r0  # disc [0, r_min] with a frozen integrand
    elif mapping == "uniform_s":
        s_max = 0.25 * r_max * r_max
        s = np.linspace(0.0, s_max, N)
        r = 2 * np.sqrt(s)
        w = 2 * gregory_weights(N, s[1] - s[0])
    else:
        h = r_max / N
        r = h * (np.arange(N) + 0.5)
        w = r * h
    return RadialGrid(nodes=r, quad_weights=w, r_max=float(r_max), mapping=mapping, K_max=int(K_max))


def grid_from_config(block: dict) -> RadialGrid:
    return make_grid(block.get("N", 1025), block.get("r_max", 20.0), block.get("mapping", "uniform_r"),
                     K_max=block.get("K_max", DEFAULT_KMAX), r_min=block.get("r_min"))


# ---------------------------------------------------------------------------
# Polar fields
# ---------------------------------------------------------------------------

@dataclass
class PolarField:
    """Vorticity as angular modes w_k(r), |k| <= K; row K + k holds mode k."""

    grid: RadialGrid
    coeffs: np.ndarray
    reality: bool = True

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] % 2 != 1:
            raise ValueError("coeffs must have shape (2K+1, N)")
        if self.coeffs.shape[1] != self.grid.N:
            raise ValueError("coeffs do not match the grid")
        if self.reality:
            self.enforce_reality()

    @property
    def K(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def mode(self, k: int) -> np.ndarray:
        if abs(k) > self.K:
            return np.zeros(self.grid.N, dtype=complex)
        return self.coeffs[self.K + k]

    @property
    def modes(self) -> dict:
        return {int(k): self.coeffs[self.K + k] for k in self.ks}

    def enforce_reality(self):
        K = self.K
        self.coeffs[K] = self.coeffs[K].real
        for k in range(1, K + 1):
            self.coeffs[K - k] = np.conj(self.coeffs[K + k])

    def copy(self) -> "PolarField":
        return PolarField(self.grid, self.coeffs.copy(), self.reality)

    def __add__(self, other: "PolarField") -> "PolarField":
        K = max(self.K, other.K)
        return PolarField(self.grid, _pad(self.coeffs, K) + _pad(other.coeffs, K), self.reality and other.reality)

    def __sub__(self, other):
        return self + other * (-1.0)

    def __mul__(self, t: float) -> "PolarField":
        return PolarField(self.grid, self.coeffs * t, self.reality)

    __rmul__ = __mul__

    def with_K(self, K: int) -> "PolarField":
        return PolarField(self.grid, _pad(self.coeffs, K), self.reality)

    @classmethod
    def zeros(cls, grid: RadialGrid, K: int | None = None) -> "PolarField":
        K = grid.K_max if K is None else K
        return cls(grid, np.zeros((2 * K + 1, grid.N), dtype=complex))

    @classmethod
    def radial(cls, grid: RadialGrid, values, K: int | None = None) -> "PolarField":
        f = cls.zeros(grid, K)
        f.coeffs[f.K] = np.asarray(values, dtype=float)
        return f

    @classmethod
    def from_modes(cls, grid: RadialGrid, modes: dict, K: int | None = None, reality: bool = True):
        if K is None:
            K = max([abs(int(k)) for k in modes] + [0])
        c = np.zeros((2 * K + 1, grid.N), dtype=complex)
        for k, v in modes.items():
            c[K + int(k)] = v
        if reality:
            for k, v in modes.items():
                if int(k) > 0 and -int(k) not in modes:
                    c[K - int(k)] = np.conj(v)
                if int(k) < 0 and -int(k) not in modes:
                    c[K - int(k)] = np.conj(v)
        return cls(grid, c, reality)

    def x_norm_sq(self, profile) -> float:
        A = profile.weight_A(self.grid.nodes)
        return float(2 * np.pi * np.sum(self.grid.integrate(A * np.abs(self.coeffs) ** 2)))

    def to_collocation(self, M: int | None = None):
        """Values on an M-point angular grid; returns (theta, values[M, N])."""
        K = self.K
        if M is None:
            M = max(8, 2 * K + 2)
        if M < 2 * K + 1:
            raise ValueError("angular grid too coarse for the stored modes")
        spec = np.zeros((M, self.grid.N), dtype=complex)
        for k in range(-K, K + 1):
            spec[k % M] += self.coeffs[K + k]
        vals = np.fft.ifft(spec, axis=0) * M
        theta = 2 * np.pi * np.arange(M) / M
        return theta, (vals.real if self.reality else vals)

    @classmethod
    def from_collocation(cls, grid: RadialGrid, values, K: int, reality: bool = True):
        M = values.shape[0]
        spec = np.fft.fft(values, axis=0) / M
        c = np.zeros((2 * K + 1, grid.N), dtype=complex)
        for k in range(-K, K + 1):
            c[K + k] = spec[k % M]
        return cls(grid, c, reality)

    def to_csv_rows(self):
        r = self.grid.nodes
        for k in self.ks:
            v = self.coeffs[self.K + k]
            for i in range(self.grid.N):
                yield (int(k), r[i], v[i].real, v[i].imag)


def _pad(c: np.ndarray, K: int) -> np.ndarray:
    K0 = (c.shape[0] - 1) // 2
    if K0 == K:
        return c
    out = np.zeros((2 * K + 1, c.shape[1]), dtype=complex)
    m = min(K0, K)
    out[K - m:K + m + 1] = c[K0 - m:K0 + m + 1]
    return out


def moments(field: PolarField):
    """(M0, M1, M2, I): mass, first moments and the radial second moment."""
    g = field.grid
    r = g.nodes
    w0 = field.mode(0)
    wm1 = field.mode(-1)
    M0 = 2 * np.pi * g.integrate(w0).real
    z = 2 * np.pi * g.integrate(r * wm1)
    I = 2 * np.pi * g.integrate(r * r * w0).real
    return float(M0), float(z.real), float(z.imag), float(I)


CONSTRAINTS = ("mass", "angular_first", "linear_first")


def _representers(which, r, A):
    """Per-mode constraint representers (functional weight, X-representer)."""
    reps = {0: [], 1: []}
    if "mass" in which:
        reps[0].append((np.ones_like(r), 1.0 / (2 * np.pi * A)))
    if "angular_first" in which:
        reps[1].append((np.ones_like(r), 1.0 / (2 * np.pi * A)))
    if "linear_first" in which:
        reps[1].append((r, r / (2 * np.pi * A)))
    return reps


def project_constraints(field: PolarField, which, profile, weight_A=None) -> PolarField:
    """X-orthogonal projection onto the subspace where the chosen functionals vanish.

    which is a subset of {"mass", "angular_first", "linear_first"}; the X inner
    product is 2 pi sum_k int A w_k conj(v_k) r dr.  weight_A optionally
    overrides the profile's A on the grid nodes.
    """
    which = set([which] if isinstance(which, str) else which)
    bad = which - set(CONSTRAINTS)
    if bad:
        raise ValueError(f"unknown constraints {sorted(bad)}")
    if "linear_first" in which and not profile.beta > 4:
        raise ValueError("linear_first projection needs beta > 4 (representer r/A not in X)")
    g = field.grid
    r = g.nodes
    A = profile.weight_A(r) if weight_A is None else weight_A
    reps = _representers(which, r, A)
    out = field.copy()
    for kabs, lst in reps.items():
        if not lst or kabs > out.K:
            continue
        F = np.array([l for l, _ in lst])          # functional weights
        R = np.array([rep for _, rep in lst])      # representers
        G = np.array([[g.integrate(F[i] * R[j]) for j in range(len(lst))] for i in range(len(lst))])
        for k in {kabs, -kabs}:
            v = out.coeffs[out.K + k]
            rhs = np.array([g.integrate(F[i] * v) for i in range(len(lst))])
            c = np.linalg.solve(G, rhs)
            out.coeffs[out.K + k] = v - c @ R
    return out


def x_inner(u: PolarField, v: PolarField, profile) -> complex:
    A = profile.weight_A(u.grid.nodes)
    K = min(u.K, v.K)
    acc = 0.0
    for k in range(-K, K + 1):
        acc += u.grid.integrate(A * u.mode(k) * np.conj(v.mode(k)))
    return 2 * np.pi * acc
