import numpy as np
import pytest

from arnold_lab import evolve as V
from arnold_lab.grid import moments

SMALL = dict(N=128, r_max=12.0, K=4, stride=10)


@pytest.fixture(scope="module")
def sgrid():
    return V.evolution_grid(128, 12.0, 6)


def xnorm(state):
    A = V.discrete_weight(state.field.grid)
    return 2 * np.pi * np.sum(state.field.grid.integrate(A * np.abs(state.field.coeffs) ** 2))


def test_zero_state_is_fixed(sgrid):
    s = V.init_state({"kind": "zero"}, 3.0, sgrid)
    for _ in range(5):
        s = V.step(s, 0.01)
    assert np.all(s.field.coeffs == 0)
    assert s.time == pytest.approx(0.05)


@pytest.mark.parametrize("kind", [{"kind": "random", "seed": 3, "radial": False},
                                  {"kind": "mode", "k": 3, "rate": 1.5},
                                  {"kind": "bump", "center": [0.8, -0.4], "sigma": 0.6}])
def test_init_state_contract(sgrid, kind):
    s = V.init_state(dict(kind, norm=2e-3), 1.0, sgrid)
    assert np.sqrt(xnorm(s)) == pytest.approx(2e-3, rel=1e-12)
    M0, M1, M2, _ = moments(s.field)
    assert max(abs(M0), abs(M1), abs(M2)) <= 1e-12 * 2e-3
    c = s.field.coeffs
    np.testing.assert_array_equal(c[::-1], np.conj(c))


@pytest.mark.parametrize("spec", [{"kind": "mode", "rate": 0.4}, {"kind": "mode", "k": 9},
                                  {"kind": "bump", "sigma": 1.5}, {"kind": "spiral"}])
def test_init_rejects(sgrid, spec):
    with pytest.raises(ValueError):
        V.init_state(spec, 1.0, sgrid)


def test_second_order_in_time(sgrid):
    s0 = V.init_state({"kind": "random", "seed": 1, "norm": 1e-2, "radial": False}, 5.0, sgrid)

    def advance(dt, T=0.04):
        s = s0
        for _ in range(int(round(T / dt))):
            s = V.step(s, dt)
        return s.field.coeffs

    ref = advance(0.04 / 256)
    errs = [np.max(np.abs(advance(dt) - ref)) for dt in (0.02, 0.01, 0.005)]
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(4.0, rel=0.1)


def test_radial_run_is_pure_diffusion():
    init = {"kind": "random", "seed": 2, "radial": True, "K": 0, "norm": 1e-3}
    a = V.run(dict(SMALL, alpha=0.0, T=2.0, dt=0.01, init=init))
    b = V.run(dict(SMALL, alpha=10.0, T=2.0, dt=0.01, init=init))
    np.testing.assert_array_equal(a.xnorm_series, b.xnorm_series)
    assert a.summary()["J_monotone"]


def test_gaussian_mode_decay_rate():
    # r^2 e^{-r^2/4} e^{2 i theta} is an eigenfunction of L with eigenvalue -1, so x(t) = x0 e^{-2t}
    log = V.run(dict(SMALL, alpha=0.0, T=2.0, dt=0.01, init={"kind": "mode", "k": 2, "rate": 1.0}))
    np.testing.assert_allclose(log.xnorm_series, log.xnorm_series[0] * np.exp(-2 * log.times), rtol=1e-3)
    assert log.fitted_mu == pytest.approx(2.0, rel=1e-3)


def test_short_run_diagnostics():
    log = V.run(dict(SMALL, alpha=1.0, T=1.0, dt=0.01, init={"kind": "random", "seed": 4, "radial": False}))
    s = log.summary()
    assert s["J_monotone"]
    assert s["max_moment_drift"] <= 1e-8 * np.sqrt(s["xnorm0"])
    assert s["steps"] == 100 and len(log.times) == 11
    lines = log.to_csv().splitlines()
    assert lines[0] == ",".join(V.CSV_HEADER) and len(lines) == 12


def test_residual_is_second_order():
    init = {"kind": "random", "seed": 5, "radial": False, "norm": 1e-2}
    r = [np.max(V.run(dict(SMALL, alpha=1.0, T=0.4, dt=dt, init=init)).identity_residual) for dt in (0.02, 0.01)]
    assert r[0] / r[1] > 3.0


def test_cfl_violation(sgrid):
    s = V.init_state({"kind": "mode", "k": 2, "norm": 10.0}, 1.0, sgrid)
    with pytest.raises(V.CFLViolation):
        V.step(s, 5.0)
    with pytest.raises(V.CFLViolation):
        V.run(dict(SMALL, alpha=0.0, dt=0.05, T=1.0, init={"kind": "mode", "k": 2, "norm": 50.0}))


def test_nonfinite_step_raises(sgrid, monkeypatch):
    s = V.init_state({"kind": "mode", "k": 2}, 1.0, sgrid)
    monkeypatch.setattr(V.Evolver, "step", lambda self, c, F0=None: c * np.nan)
    with pytest.raises(FloatingPointError):
        V.step(s, 0.01)


def test_blowup_guard(monkeypatch):
    monkeypatch.setattr(V, "BLOWUP", 1e-3)
    with pytest.raises(V.BlowUp):
        V.run(dict(SMALL, alpha=0.0, T=0.1, dt=0.01, init={"kind": "mode", "k": 2}))


def test_run_config_validation():
    with pytest.raises(ValueError):
        V.RunConfig.from_dict({"alpha": 1.0, "bogus": 2})
    with pytest.raises(ValueError):
        V.run(dict(SMALL, T=0.105, dt=0.01, init={"kind": "mode", "k": 2}))
    assert V.RunConfig.from_dict({"alpha": 2.0}).alpha == 2.0


def test_default_dt(sgrid):
    h = sgrid.dr_min
    assert V.default_dt(sgrid, 0.0) == pytest.approx(0.25 * h * h)
    assert V.default_dt(sgrid, 1e4) < V.default_dt(sgrid, 0.0)
