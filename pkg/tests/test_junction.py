import math

import numpy as np
import pytest

from attostm.errors import DomainError
from attostm.junction import build_potential, classical_image_potential, sample_eigenstate, solve_initial_state
from attostm.units import EV, NM, JunctionConfig, PulseConfig


def textbook_barrier_transmission(e_kin, v0, d):
    """Rectangular barrier of height v0 between equal flat regions (m = hbar = 1)."""
    k = math.sqrt(2 * e_kin)
    kap = math.sqrt(2 * (v0 - e_kin))
    return 1.0 / (1.0 + (k**2 + kap**2) ** 2 * math.sinh(kap * d) ** 2 / (4 * k**2 * kap**2))


@pytest.mark.parametrize("d_nm", [0.2, 0.5, 1.0])
def test_transmission_matches_textbook(d_nm):
    j = JunctionConfig.from_user(d_nm)
    s = solve_initial_state(j, j.fermi_level)
    assert s.transmission == pytest.approx(textbook_barrier_transmission(5 * EV, 10 * EV, d_nm * NM), rel=1e-9)


def test_unitarity_and_matching():
    j = JunctionConfig.from_user(0.7, fermi_sample_eV=7.0, work_sample_eV=5.0)
    s = solve_initial_state(j, -5.0 * EV)
    assert abs(s.R) ** 2 + s.transmission == pytest.approx(1.0, abs=1e-12)
    eps = 1e-9
    for x in (0.0, j.d):
        assert s(x - eps) == pytest.approx(s(x + eps), rel=1e-6)
        assert s.derivative(x - eps) == pytest.approx(s.derivative(x + eps), rel=1e-6)


def test_gap_solves_the_schroedinger_equation():
    j = JunctionConfig.from_user(0.5)
    s = solve_initial_state(j, j.fermi_level)
    x = np.linspace(0.1 * j.d, 0.9 * j.d, 7)
    h = 1e-3
    second = (s(x + h) - 2 * s(x) + s(x - h)) / h**2
    # -psi''/2 + 0 * psi = E psi inside the field-free gap
    np.testing.assert_allclose(-0.5 * second, s.energy * s(x), rtol=1e-5)


def test_non_rectangular_rejected():
    with pytest.raises(DomainError):
        solve_initial_state(JunctionConfig.from_user(1.0, bias_V=0.1), -5 * EV)
    with pytest.raises(DomainError):
        solve_initial_state(JunctionConfig.from_user(1.0), 1.0 * EV)


def test_sample_eigenstate():
    j = JunctionConfig.from_user(1.0)
    s = sample_eigenstate(j, 3 * EV)
    assert s.k == pytest.approx(math.sqrt(2 * 13 * EV))
    assert abs(s(2.0)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        sample_eigenstate(j, -11 * EV)


def test_potential_profile_shape():
    j = JunctionConfig.from_user(1.0, bias_V=0.5)
    pot = build_potential(j, PulseConfig.from_user(10.0))
    x = np.array([-1.0, 0.0, 0.5 * j.d, j.d, j.d + 1.0])
    v0 = pot.v0(x)
    assert v0[0] == pytest.approx(j.tip_floor)
    assert v0[2] == pytest.approx(0.5 * j.static_drop)
    assert v0[-1] == pytest.approx(j.sample_floor)
    # laser term is -e E(t) x in the gap, constant beyond
    t = 0.3
    np.testing.assert_allclose(pot.v_int(x, t), pot.laser_field(t) * np.clip(x, 0, j.d))
    np.testing.assert_allclose(pot.v_is(x, t)[[0, -1]], pot.v_int(x, t)[[0, -1]] + np.array(
        [0.0, j.sample_floor + (j.fermi_sample + j.work_sample)]))


def test_image_hook_is_off_by_default():
    j = JunctionConfig.from_user(1.0)
    assert build_potential(j).image is None
    on = JunctionConfig.from_user(1.0, image_potential=True)
    v = classical_image_potential(on)
    assert v(0.5 * on.d) < 0
    assert build_potential(on).image is not None
