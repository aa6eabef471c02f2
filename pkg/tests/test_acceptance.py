"""Acceptance criteria 1-12, one test each.

Every test prints a single [PASS]/[FAIL] line (capture disabled so it reaches
the terminal) and then asserts the individual quantities at the stated
tolerances, not just the aggregated flag.
"""
import numpy as np
import pytest

from arnold_lab import checks


@pytest.fixture
def report(capsys):
    def emit(number, res):
        with capsys.disabled():
            print(f"\ncriterion {number:2d}: {res.line()}")
        return res.values
    return emit


def test_criterion_01_hardy(report):
    res = checks.check_hardy()
    v = report(1, res)
    assert v["gaussian"] == pytest.approx(0.57, abs=0.01)
    assert v["kappa2"] == pytest.approx(1.0, abs=1e-3)
    assert v["kappa2_minimizer_L2_error"] <= 1e-3
    assert v["kappa3"] < 1 < v["kappa1.5"]
    assert max(v["seconds_each"].values()) < 10
    assert res.passed


def test_criterion_02_btilde1(report):
    res = checks.check_btilde1()
    v = report(2, res)
    for name in ("gaussian", "kappa3"):
        assert v[name]["spectral_radius"] == pytest.approx(1.0, abs=1e-3)
        assert v[name]["eigfn_L2_error"] <= 1e-2
        assert v[name]["seconds"] < 30
    assert res.passed


def test_criterion_03_kernel_index(report):
    res = checks.check_kernel()
    v = report(3, res)
    assert v["gaussian_largest"] == pytest.approx(0.7127, abs=0.005)
    assert v["kappa2_largest"] > 1 and v["kappa2_index"] >= 1
    assert res.passed


def test_criterion_04_lk_spectra(report):
    res = checks.check_lk()
    v = report(4, res)
    assert v["mu0"] == pytest.approx(-0.722, abs=0.005)
    assert v["mu1"] == pytest.approx(0.615, abs=0.005)
    assert abs(v["L1_lowest"]) <= 1e-4
    assert v["L3_lowest"] >= 0.5
    assert res.passed


def test_criterion_05_quasimode(report):
    res = checks.check_quasimode()
    v = report(5, res)
    assert v["R_rel_err"] <= 1e-6 and v["overlap_rel_err"] <= 1e-6
    assert -0.75 <= v["mu0"] <= -0.75 + v["epsilon"]
    lo, hi = v["rayleigh_basic"]
    assert 0.5 < lo and hi < 0.693
    assert v["rayleigh_improved"][0] >= 0.6
    assert res.passed


def test_criterion_06_appendix(report):
    res = checks.check_appendix()
    v = report(6, res)
    assert v["V_gaussian_min"] > 0 and v["V_kappa3_min"] > 0
    assert v["V_kappa1.5_max"] < 0
    assert v["V_kappa2_absmax"] < 1e-10
    lo, hi = v["B_over_A_range"]
    assert 0.5 <= lo and hi <= 1.75 and v["B_over_A_max_increase"] <= 0
    assert v["Bm1_over_A_max"] < 0.75
    assert v["W_margin_min"] > 0
    assert res.passed


def test_criterion_07_energy(report):
    res = checks.check_energy()
    v = report(7, res)
    for name in ("gaussian", "kappa2", "kappa3"):
        assert v[name]["rel"] <= 1e-6
    assert abs(v["disk"]["radial"] - v["disk"]["brute"]) <= 1e-8
    assert v["disk"]["brute"] == pytest.approx(np.pi / 16, abs=1e-10)
    assert v["scaling_rel_err"] <= 1e-6
    assert res.passed


def test_criterion_08_riesz_hls(report):
    res = checks.check_riesz()
    v = report(8, res)
    assert v["min_riesz_gap_over_M2"] >= -1e-12
    assert v["min_hls_gap_over_M2"] >= -1e-6
    assert abs(v["extremal_hls_gap_over_M2"]) <= 1e-4
    assert res.passed


def test_criterion_09_coercivity(report):
    res = checks.check_coercivity()
    v = report(9, res)
    assert v["gamma"] == pytest.approx(min(0.5, 1 - v["C1_prime"]))
    assert v["min_J_over_x"] >= v["gamma"] / 2
    assert v["min_Q_over_x"] >= v["delta"] > 0
    assert v["q_form_vs_Lk_rel"] <= 1e-8
    assert res.passed


def test_criterion_10_evolution(report):
    res = checks.check_evolution()
    v = report(10, res)
    for a in ("alpha=0", "alpha=1", "alpha=10"):
        r = v[a]
        assert r["moment_drift_rel"] < 1e-8
        assert r["residual_ratio"] >= 3.5
        assert r["J_nonincreasing"]
        assert r["fitted_mu"] > 0
        assert r["decay_bound_holds"]
        assert r["seconds"] < 300
    assert res.passed


def test_criterion_11_linear_invariance(report):
    res = checks.check_invariance()
    v = report(11, res)
    for a in ("alpha=1", "alpha=10"):
        assert v[a] < 1e-6
    assert res.passed


def test_criterion_12_maximizer(report, capsys):
    res = checks.check_maximizer()
    v = report(12, res)
    d = v["gaussian_L1_over_M (reported)"]
    with capsys.disabled():
        print(f"              gaussian entropy: L1 distance to e^(-r^2/4) over M = {d:.3e} (reported only)")
    assert v["kappa2_L1_over_M"] <= 1e-3
    assert v["F_nondecreasing"]
    assert np.isfinite(d)
    assert res.passed
