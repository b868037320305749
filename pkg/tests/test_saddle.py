import math

import numpy as np
import pytest

from attostm.errors import DomainError
from attostm.pulse import Waveform
from attostm.saddle import (_jacobian, _residuals, asymptote_crossing, cutoff_energy, displacement,
                            dominant_saddle, main_branch, saddle_action, saddles_to_csv, solve_saddles,
                            trajectory, travel_time_asymptotics)
from attostm.sfa import a2_integral, a_integral
from attostm.units import EV, NM, JunctionConfig, PulseConfig


@pytest.fixture
def setup():
    j = JunctionConfig.from_user(1.0)
    p = PulseConfig.from_user(35.0)
    wf = Waveform.cw(p.peak_field, p.omega, 0.0, 0.0)
    return j, wf, j.fermi_level


def full_action(x, e, e0abs, d, wf):
    """S(t1, t2, p) before any stationarity condition is used (e = -1, m = 1)."""
    t1, t2, p = x
    tau = t2 - t1
    int_a = -a_integral(t1, t2, wf)
    int_a2 = a2_integral(t1, t2, wf)
    return e * t2 + e0abs * t1 - 0.5 * (p * p * tau + 2 * p * int_a + int_a2) + p * d


def test_saddles_solve_the_stationarity_conditions(setup):
    j, wf, e0 = setup
    sols = solve_saddles(10 * EV, e0, j, wf)
    assert sols
    for s in sols:
        assert s.max_residual < 1e-10
        assert s.action.imag >= 0
        assert s.t2.real > s.t1.real


def test_saddle_is_stationary_point_of_the_full_action(setup):
    j, wf, e0 = setup
    e = 12 * EV
    s = dominant_saddle(solve_saddles(e, e0, j, wf))
    x = np.array([s.t1, s.t2, s.p])
    f = lambda y: full_action(y, e, abs(e0), j.d, wf)
    assert f(x) == pytest.approx(s.action, rel=1e-10)
    assert saddle_action(s.t1, s.t2, s.p, e, abs(e0), wf) == pytest.approx(f(x), rel=1e-12)
    for k, h in enumerate((1e-3, 1e-3, 1e-5)):
        dx = np.zeros(3, complex)
        dx[k] = h
        grad = (f(x + dx) - f(x - dx)) / (2 * h)
        scale = abs(f(x + dx) - f(x)) / h + 1.0
        assert abs(grad) / scale < 1e-5


def test_jacobian_matches_finite_differences(setup):
    j, wf, e0 = setup
    x = np.array([complex(-5.0, 30.0), complex(40.0, -8.0), complex(0.8, 0.3)])
    J = _jacobian(x, wf)
    for k in range(3):
        dx = np.zeros(3, complex)
        dx[k] = 1e-6
        fd = (_residuals(x + dx, 3.0, abs(e0), j.d, wf) - _residuals(x - dx, 3.0, abs(e0), j.d, wf)) / 2e-6
        np.testing.assert_allclose(J[:, k], fd, rtol=1e-6, atol=1e-9)


def test_cutoff_and_asymptote_crossing(setup):
    j, wf, e0 = setup
    ec = cutoff_energy(j, wf, e0)
    assert ec / EV == pytest.approx(35.0 * 1.0 - 5.0, rel=1e-6)
    assert asymptote_crossing(j, wf, e0) == pytest.approx(ec, rel=1e-9)
    est = travel_time_asymptotics(ec, e0, j, wf)
    assert est["low_E"].imag == pytest.approx(est["high_E"].imag, rel=1e-9)


def test_no_plateau_raises():
    j = JunctionConfig.from_user(0.1)
    p = PulseConfig.from_user(35.0)
    wf = Waveform.cw(p.peak_field, p.omega)
    with pytest.raises(DomainError):
        cutoff_energy(j, wf, j.fermi_level)


def test_main_branch_is_continuous(setup):
    j, wf, e0 = setup
    e = np.linspace(2, 40, 20) * EV
    sols = main_branch(e, e0, j, wf)
    tau = np.array([s.tau for s in sols])
    assert all(s.max_residual < 1e-10 for s in sols)
    assert np.all(tau.imag < 0)
    assert np.max(np.abs(np.diff(tau))) < 0.2 * np.max(np.abs(tau))
    assert len(saddles_to_csv(sols).splitlines()) == len(sols) + 1


def test_trajectory_ends_at_the_far_electrode(setup):
    j, wf, e0 = setup
    s = main_branch([10 * EV], e0, j, wf)[0]
    assert displacement(s, s.t2, wf) == pytest.approx(j.d, rel=1e-9, abs=1e-9)
    base = trajectory(s, wf)
    assert base.x[0] == 0
    assert base.x[-1] == pytest.approx(j.d, rel=1e-9, abs=1e-9)
    for shift in (-0.1, 0.1):
        via = s.t1.real + shift * abs(s.tau.real)
        tr = trajectory(s, wf, via=via)
        assert tr.x[-1] == pytest.approx(j.d, rel=1e-9, abs=1e-9)
    assert set(base.leg) == {"tunneling", "classical", "attenuation"}
    assert math.isclose(base.t[-1].real, s.t2.real)
    assert "re_x_nm" in base.to_csv()
