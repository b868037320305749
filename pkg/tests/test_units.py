import math

import pytest
import scipy.constants as sc
from hypothesis import given, strategies as st

from attostm import ConfigError, DomainError, Quantity, Unit, au, from_atomic, keldysh_gamma, to_atomic
from attostm.units import AS, EV, FS, NM, V_PER_NM, JunctionConfig, PulseConfig

HARTREE_J = sc.physical_constants["Hartree energy"][0]
BOHR = sc.physical_constants["Bohr radius"][0]
T_AU = sc.physical_constants["atomic unit of time"][0]
F_AU = sc.physical_constants["atomic unit of electric field"][0]


def test_scales_match_codata():
    assert EV == pytest.approx(sc.eV / HARTREE_J, rel=1e-14)
    assert NM == pytest.approx(1e-9 / BOHR, rel=1e-14)
    assert FS == pytest.approx(1e-15 / T_AU, rel=1e-14)
    assert AS == pytest.approx(1e-18 / T_AU, rel=1e-14)
    assert V_PER_NM == pytest.approx(1e9 / F_AU, rel=1e-14)


def test_known_values():
    # 1 hartree = 27.211386... eV, 1 bohr = 0.0529177... nm
    assert 1.0 / EV == pytest.approx(27.211386245988, rel=1e-10)
    assert 1.0 / NM == pytest.approx(0.0529177210903, rel=1e-9)


def test_unit_aliases_and_rejection():
    assert Quantity(1.0, "eV").unit is Unit.EV
    assert Quantity(1.0, "V/nm").unit is Unit.V_PER_NM
    with pytest.raises(ConfigError):
        Quantity(1.0, "furlong")


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
       st.sampled_from([Unit.EV, Unit.NM, Unit.FS, Unit.AS, Unit.V_PER_NM, Unit.VOLT]))
def test_round_trip(value, unit):
    back = from_atomic(to_atomic(Quantity(value, unit)).value, unit)
    assert back.unit is unit
    assert back.value == pytest.approx(value, rel=1e-13, abs=1e-300)


def test_to_atomic_picks_atomic_unit():
    q = to_atomic(Quantity(2.0, Unit.FS))
    assert q.unit is Unit.AU_TIME and q.value == pytest.approx(2 * FS)


def test_keldysh_against_si_formula():
    lam, F, ip = 830e-9, 17e9, 5.0 * sc.eV
    omega = 2 * math.pi * sc.c / lam
    gamma_si = omega * math.sqrt(2 * sc.m_e * ip) / (sc.e * F)
    p = PulseConfig.from_user(17.0, wavelength_nm=830.0)
    assert keldysh_gamma(p, -5.0 * EV) == pytest.approx(gamma_si, rel=1e-9)


def test_keldysh_zero_field():
    with pytest.raises(DomainError):
        keldysh_gamma(PulseConfig.from_user(0.0), -5 * EV)


def test_pulse_frequency_from_wavelength():
    p = PulseConfig.from_user(1.0, wavelength_nm=800.0)
    assert p.omega == pytest.approx(2 * math.pi * sc.c / 800e-9 * T_AU, rel=1e-12)


def test_pulse_window_rules():
    p = PulseConfig.from_user(1.0, fwhm_fs=6.0)
    assert p.t_window == pytest.approx((-12 * FS, 12 * FS))
    with pytest.raises(ConfigError):
        PulseConfig.from_user(1.0, window_fwhm=3.0)
    with pytest.raises(ConfigError):
        PulseConfig.from_user(-1.0)
    assert p.with_(fwhm=3 * FS).t_window == pytest.approx((-6 * FS, 6 * FS))


def test_junction_validation():
    with pytest.raises(ConfigError):
        JunctionConfig.from_user(0.0)
    with pytest.raises(ConfigError):
        JunctionConfig.from_user(1.0, work_tip_eV=-1.0)
    j = JunctionConfig.from_user(1.0, work_tip_eV=5.5, work_sample_eV=5.0)
    # (W_t - W_s)/e with e = -1: a negative Volta potential of -0.5 V
    assert j.contact_potential == pytest.approx(-0.5 * EV)
    with pytest.raises(ConfigError):
        JunctionConfig(1.0, 0.2, 0.2, 0.2, 0.2, contact_potential=0.3)


def test_mirror_is_an_involution():
    j = JunctionConfig.from_user(1.0, fermi_tip_eV=5.5, work_tip_eV=5.3, work_sample_eV=4.8, bias_V=0.2)
    m = j.mirrored()
    assert m.work_tip == j.work_sample and m.bias == -j.bias
    assert m.mirrored() == j


def test_au_shorthand():
    assert au(1.0, "nm") == pytest.approx(NM)
