import numpy as np
import pytest
from scipy import integrate

from arnold_lab.profiles import (eval_V, eval_gaussian_BW, gaussian_B_over_A, gaussian_Bm1_over_A,
                                 make_profile, rescale, GaussianWeights)

# Frozen mpmath oracles (40 digits): V from chi = log(A)/2 differentiated numerically,
# B = 1 + A - A'/r and W = chi'' + chi'/r + chi'^2 - B/A.
V_GAUSS_R2 = 0.1243374247307203141673961
V_K15_R1 = -0.1553300858899106433006333
V_K3_R1 = 0.5555555555555555555555556
B_ORACLE = {0.5: 1.771246412828882420621121, 2.0: 2.218281828459045235360287, 5.0: 48.89879012922214000720309}
W_ORACLE = {0.5: -1.457275798531975384202881, 2.0: -0.8756625752692796858326039, 5.0: 1.011372573572161364434124}


def test_kappa2_weight_closed_form(k2):
    r = np.linspace(0, 30, 301)
    np.testing.assert_allclose(k2.weight_A(r), (1 + r * r) ** 2 / 8, rtol=1e-12)


def test_gaussian_weight_and_origin_limit(gauss):
    r = np.linspace(0.05, 12, 200)
    np.testing.assert_allclose(gauss.weight_A(r), 4 * np.expm1(r * r / 4) / r**2, rtol=1e-12)
    assert gauss.weight_A(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-14)
    assert gauss.A0() == pytest.approx(-gauss.omega_star(0.0) / (2 * gauss.omega_second0()))


@pytest.mark.parametrize("params", [{"kappa": 0.5}, {"kappa": 1.0}, {}])
def test_algebraic_rejects_bad_kappa(params):
    with pytest.raises(ValueError):
        make_profile("algebraic", params)


def test_custom_rejects_bad_samples():
    r = np.linspace(0, 5, 20)
    with pytest.raises(ValueError):
        make_profile("custom", samples=np.c_[r, np.exp(-r) * (1 + np.sin(3 * r))].tolist())
    with pytest.raises(ValueError):
        make_profile("custom", samples=np.c_[r, -np.exp(-r)].tolist())
    with pytest.raises(ValueError):
        make_profile("unknown")


def test_V_values_against_oracle(gauss, k15, k3, k2):
    assert float(eval_V(gauss, 2.0)) == pytest.approx(V_GAUSS_R2, rel=1e-10)
    assert float(eval_V(k15, 1.0)) == pytest.approx(V_K15_R1, rel=1e-10)
    assert float(eval_V(k3, 1.0)) == pytest.approx(V_K3_R1, rel=1e-10)
    r = np.geomspace(1e-3, 1e3, 500)
    assert np.max(np.abs(eval_V(k2, r))) < 1e-10


def test_V_domain_error(gauss):
    with pytest.raises(ValueError):
        eval_V(gauss, 0.0)


def test_V_sign_pattern(gauss, k3, k15):
    r = np.geomspace(1e-3, 1e3, 2000)
    assert np.all(eval_V(gauss, r) > 0)
    assert np.all(eval_V(k3, r) > 0)
    assert np.all(eval_V(k15, r) < 0)


@pytest.mark.parametrize("r", [0.5, 2.0, 5.0])
def test_B_W_against_oracle(r):
    B, W = eval_gaussian_BW(np.array([r]))
    assert B[0] == pytest.approx(B_ORACLE[r], rel=1e-10)
    assert W[0] == pytest.approx(W_ORACLE[r], rel=1e-9)


def test_B_over_A_at_two():
    h1 = 1 - 1 / (np.e - 1)
    A = np.expm1(1.0)  # s = 1
    B = eval_gaussian_BW(np.array([2.0]))[0][0]
    assert B / A == pytest.approx(0.5 * (1 + h1) + 1 / A, rel=1e-12)


def test_W_limits():
    B, W = eval_gaussian_BW(np.array([0.0, 1e-5, 1e-2]))
    assert W[0] == pytest.approx(-1.5, abs=1e-14)
    assert B[0] == pytest.approx(1.75, abs=1e-14)
    assert W[2] == pytest.approx(-1.5, abs=1e-4)
    r = np.array([50.0, 200.0])
    assert eval_gaussian_BW(r)[1] / (r * r / 16) == pytest.approx([1, 1], rel=5e-3)


def test_series_branch_is_continuous(gauss):
    # both sides of the small-s switch agree
    s = np.array([0.999e-3, 1.001e-3])
    r = 2 * np.sqrt(s)
    A = gauss.weight_A(r)
    V = gauss.potential_V(r)
    B, W = eval_gaussian_BW(r)
    for f in (A, V, B, W):
        assert abs(f[1] - f[0]) < 1e-5 * max(1.0, abs(f[0]))


def test_appendix_ratios():
    r = np.linspace(1e-3, 40, 4000)
    BA = gaussian_B_over_A(r)
    assert np.all(np.diff(BA) <= 0)
    assert BA.min() >= 0.5 and BA.max() <= 1.75
    assert np.all(gaussian_Bm1_over_A(r) < 0.75)
    assert np.all(eval_gaussian_BW(r)[1] > r * r / 16 - 1.5)


@pytest.mark.parametrize("name", ["gauss", "k2", "k3", "k15"])
def test_psi_prime_by_quadrature(name, request):
    p = request.getfixturevalue(name)
    r = np.array([0.3, 1.0, 2.5, 7.0])
    quad = np.array([integrate.quad(lambda s: s * p.omega_star(s), 0, x, epsabs=1e-14, epsrel=1e-13)[0] / x
                     for x in r])
    np.testing.assert_allclose(p.psi_prime(r), quad, rtol=1e-8)


@pytest.mark.parametrize("name", ["gauss", "k2", "k3", "k15"])
def test_weight_growth_bound(name, request):
    p = request.getfixturevalue(name)
    r = np.geomspace(1e-3, 1e3, 400)
    A = p.weight_A(r)
    assert np.all(A > 0)
    beta = p.beta if np.isfinite(p.beta) else 8.0
    assert np.min(A * (1 + r) ** (-beta)) > 0


def test_monotone_profile(gauss, k3):
    r = np.linspace(1e-3, 20, 500)
    for p in (gauss, k3):
        assert np.all(p.omega_prime(r) < 0)
        assert p.omega_star(0.0) > 0
        assert p.omega_prime(np.array([0.0]))[0] == 0


def test_amplitude_leaves_A_unchanged():
    a = make_profile("gaussian", amplitude=1 / (4 * np.pi))
    b = make_profile("gaussian")
    r = np.linspace(0, 10, 50)
    np.testing.assert_allclose(a.weight_A(r), b.weight_A(r), rtol=1e-13)
    np.testing.assert_allclose(a.omega_star(r) * 4 * np.pi, b.omega_star(r), rtol=1e-13)


def test_custom_profile_tracks_gaussian(gauss):
    r = np.linspace(0, 12, 400)
    c = make_profile("custom", samples=np.c_[r, np.exp(-r * r / 4)].tolist(), beta=4.0)
    x = np.linspace(0.1, 7, 30)
    np.testing.assert_allclose(c.omega_star(x), gauss.omega_star(x), rtol=1e-4, atol=1e-8)
    np.testing.assert_allclose(c.weight_A(x), gauss.weight_A(x), rtol=1e-2)


def test_gaussian_weights_planar():
    gw = GaussianWeights()
    x, y = np.array([1.0, 0.0]), np.array([1.0, 2.0])
    r = np.hypot(x, y)
    np.testing.assert_allclose(gw.cal_B(x, y), gw.weight_B(r))
    np.testing.assert_allclose(gw.cal_A(x, y), 4 * np.expm1(r * r / 4) / r**2)


def test_rescaled_profile_weight():
    p = make_profile("gaussian")
    q = rescale(p, 2.0)
    r = np.linspace(0.1, 5, 20)
    np.testing.assert_allclose(q.weight_A(r), p.weight_A(2 * r) / 4, rtol=1e-12)
