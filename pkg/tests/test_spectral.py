import numpy as np
import pytest

from arnold_lab import spectral as S
from arnold_lab.grid import make_grid
from arnold_lab.profiles import rescale

# closed forms for the quasimode
R2_CLOSED = (3 - np.log(2) - 2 * np.log(np.pi)) / (16 * np.log(2))
OVERLAP_CLOSED = np.sqrt(6 / np.log(2)) / np.pi


@pytest.fixture(scope="module")
def kgrid():
    return make_grid(1024, 20.0)


def test_hardy_kappa2(k2, loggrid):
    rep = S.hardy_constant(k2, loggrid)
    assert rep.converged
    assert rep.derived["C_H"] == pytest.approx(1.0, abs=1e-3)
    r = rep.r
    f = rep.eigenfunctions[:, 0] if rep.eigenfunctions.ndim == 2 else rep.eigenfunctions
    ex = r**2 / (1 + r**2) ** 2
    x = np.log(r)
    f = f / np.sqrt(np.trapezoid(f * f, x))
    ex = ex / np.sqrt(np.trapezoid(ex * ex, x))
    assert np.sqrt(np.trapezoid((f - ex) ** 2, x)) < 1e-3


def test_hardy_gaussian_and_kappa15(gauss, k15, k3, loggrid):
    assert S.hardy_constant(gauss, loggrid).derived["C_H"] == pytest.approx(0.57, abs=0.01)
    assert S.hardy_constant(k15, loggrid, check=False).derived["C_H"] > 1
    assert S.hardy_constant(k3, loggrid, check=False).derived["C_H"] < 1


def test_vsign_agrees_with_hardy(gauss, k2, k3, k15, loggrid):
    expect = {"C_H<1": lambda c: c < 1, "C_H>1": lambda c: c > 1, "C_H=1": lambda c: abs(c - 1) < 1e-3}
    for p in (gauss, k2, k3, k15):
        verdict = S.vsign_hardy_check(p, loggrid)
        assert verdict != "indeterminate"
        assert expect[verdict](S.hardy_constant(p, loggrid, check=False).derived["C_H"])
    assert S.vsign_hardy_check(gauss, loggrid) == "C_H<1"
    assert S.vsign_hardy_check(k2, loggrid) == "C_H=1"
    assert S.vsign_hardy_check(k15, loggrid) == "C_H>1"


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_hardy_scale_invariance(gauss, loggrid, lam):
    c0 = S.hardy_constant(gauss, loggrid, check=False).derived["C_H"]
    c1 = S.hardy_constant(rescale(gauss, lam), loggrid, check=False).derived["C_H"]
    assert abs(c1 - c0) < 1e-4


def test_btilde1_gaussian(gauss, kgrid):
    rep = S.btilde1_spectrum(gauss, kgrid, nev=2)
    assert rep.derived["spectral_radius"] == pytest.approx(1.0, abs=1e-3)
    assert rep.derived["eigfn_L2_error"] < 1e-3
    assert 0 < rep.derived["C1_prime"] < 1
    assert np.all(np.diff(rep.eigenvalues) <= 0) or np.all(np.diff(rep.eigenvalues) >= 0)


def test_btilde1_kappa3(k3):
    g = make_grid(1024, 100.0, "log_r", r_min=1e-3)
    rep = S.btilde1_spectrum(k3, g, nev=2, check=False)
    assert rep.derived["spectral_radius"] == pytest.approx(1.0, abs=1e-3)
    assert rep.derived["eigfn_L2_error"] < 1e-3


def test_bk_apply_stream(gauss, ugrid):
    r = ugrid.nodes
    g = S.bk_apply(1, -gauss.omega_prime(r), ugrid)
    with np.errstate(divide="ignore", invalid="ignore"):
        ex = np.where(r > 0, 2 / np.where(r > 0, r, 1) * (1 - np.exp(-r * r / 4)), 0.0)
    assert np.max(np.abs(g - ex)) < 1e-6


def test_bk_apply_zero_and_k0(ugrid):
    assert np.all(S.bk_apply(3, np.zeros(ugrid.N), ugrid) == 0)
    with pytest.raises(ValueError):
        S.bk_apply(0, np.ones(ugrid.N), ugrid)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_bk_ordering(ugrid, rng, k):
    r = ugrid.nodes
    f = np.exp(-r * r / rng.uniform(1, 6)) * (1 + rng.uniform() * r)
    b1 = S.bk_apply(1, f, ugrid)
    bk = S.bk_apply(k, f, ugrid)
    assert np.all(bk >= -1e-14)
    assert np.all(bk <= b1 / k + 1e-12)


def test_lk_spectra(ugrid):
    l0 = S.lk_spectrum(0, ugrid, nev=2)
    assert l0.eigenvalues[0] == pytest.approx(-0.722, abs=0.005)
    assert l0.eigenvalues[1] == pytest.approx(0.615, abs=0.005)
    l1 = S.lk_spectrum(1, ugrid, nev=1)
    assert abs(l1.eigenvalues[0]) < 1e-4
    assert S.lk_spectrum(3, ugrid, nev=1).eigenvalues[0] >= 0.5


def test_l1_ground_state_shape(gauss, ugrid):
    rep = S.lk_spectrum(1, ugrid, nev=1, check=False)
    r = ugrid.nodes
    f = rep.eigenfunctions[:, 0] if rep.eigenfunctions.ndim == 2 else rep.eigenfunctions
    g1 = np.sqrt(gauss.weight_A(r)) * r * np.exp(-r * r / 4)
    f = f / np.sqrt(ugrid.integrate(f * f))
    g1 = g1 / np.sqrt(ugrid.integrate(g1 * g1))
    f *= np.sign(ugrid.integrate(f * g1))
    assert np.sqrt(ugrid.integrate((f - g1) ** 2)) < 1e-3


@pytest.mark.parametrize("k", [2, 4, 6])
def test_lk_lower_bound(ugrid, k):
    assert S.lk_spectrum(k, ugrid, nev=1, check=False).eigenvalues[0] >= k / 2 - 1


def test_quasimode(ugrid):
    q = S.quasimode_analysis(make_grid(4097, 30.0))
    d = q.derived
    assert d["R_norm_sq"] == pytest.approx(R2_CLOSED, rel=1e-6)
    assert R2_CLOSED == pytest.approx(1.568e-3, abs=1e-6)
    assert d["overlap"] == pytest.approx(OVERLAP_CLOSED, rel=1e-6)
    assert d["overlap"] == pytest.approx(0.9365, abs=1e-4)
    assert d["R_min"] > 0
    mu0 = S.lk_spectrum(0, ugrid, nev=1).eigenvalues[0]
    assert -0.75 <= mu0 <= -0.75 + d["epsilon"]


def test_coercivity_bound():
    assert S.coercivity_bound(0.75, 0.45, 0.8705) == pytest.approx(0.159, abs=5e-4)
    assert S.coercivity_bound(0.0, 0.6, 0.8) == pytest.approx(0.6 * 0.64)
    assert S.coercivity_bound(0.7, 0.6, 1.0) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        S.coercivity_bound(-1.0, 0.5, 0.5)


def test_rayleigh_bounds(ugrid):
    lo, hi = S.rayleigh_mu1_bounds()
    assert lo == pytest.approx(0.5, abs=2e-3)
    assert hi == pytest.approx(-0.75 + 1 / np.log(2), abs=1e-3)
    lo2, hi2 = S.rayleigh_mu1_bounds(1.4, use_improved=True)
    assert lo2 >= 0.6
    mu1 = S.lk_spectrum(0, ugrid, nev=2).eigenvalues[1]
    assert lo <= mu1 <= hi and lo2 <= mu1 <= hi2
    with pytest.raises(ValueError):
        S.rayleigh_mu1_bounds(0.3, use_improved=True)


def test_kernel_index(gauss, k2, kgrid):
    rg = S.kernel_index(gauss, kgrid)
    assert rg.derived["largest"] == pytest.approx(0.7127, abs=0.005)
    assert rg.derived["index"] == 0
    rk = S.kernel_index(k2, make_grid(1024, 1e3, "log_r", r_min=1e-5), check=False)
    assert rk.derived["largest"] > 1 and rk.derived["index"] >= 1


def test_kernel_index_rescaled_gaussian(gauss):
    # shrinking the vortex makes the radial part of J indefinite
    idx = [S.kernel_index(rescale(gauss, lam), make_grid(1024, 20.0 / lam), check=False).derived["index"]
           for lam in (1.0, 4.0, 16.0)]
    assert idx[0] == 0 and idx[1] >= 1 and idx == sorted(idx)


def test_kernel_rejects_slow_tails(k15, kgrid):
    with pytest.raises(ValueError):
        S.kernel_index(k15.__class__(kind="algebraic", kappa=1.0, amplitude=1.0, beta=2.0), kgrid)


def test_symmetry_guard():
    with pytest.raises(AssertionError):
        S._check_symmetric(np.array([[1.0, 2.0], [2.1, 1.0]]))
    S._check_symmetric(np.eye(3))


def test_report_json(gauss, loggrid):
    js = S.hardy_constant(gauss, loggrid, check=False).to_json()
    assert set(js) >= {"operator", "eigenvalues", "derived", "resolution", "converged"}
