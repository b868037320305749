import numpy as np
import pytest

from attostm.pulse import Waveform
from attostm.units import FS, V_PER_NM, PulseConfig


@pytest.fixture(params=["gaussian", "cw"])
def wave(request):
    p = PulseConfig.from_user(20.0, fwhm_fs=3.0, cep_rad=0.4)
    if request.param == "gaussian":
        return Waveform.gaussian(p, static_field=0.5 * V_PER_NM)
    return Waveform.cw(p.peak_field, p.omega, 0.5 * V_PER_NM, 0.4)


def test_field_is_minus_time_derivative_of_a(wave):
    t = np.linspace(-5 * FS, 5 * FS, 41)
    h = 1e-3
    dA = (wave.A(t + h) - wave.A(t - h)) / (2 * h)
    np.testing.assert_allclose(wave.E(t), -dA, atol=1e-9 * wave.peak_field)


def test_field_derivative(wave):
    t = np.linspace(-5 * FS, 5 * FS, 41)
    h = 1e-3
    dE = (wave.E(t + h) - wave.E(t - h)) / (2 * h)
    np.testing.assert_allclose(wave.efield_derivative(t), dE, atol=1e-8 * wave.peak_field * wave.omega)


def test_sign_flip_and_scaling(wave):
    t = np.linspace(-2 * FS, 2 * FS, 9)
    lw = wave.laser_only()
    np.testing.assert_allclose(lw.flipped().E(t), -lw.E(t))
    np.testing.assert_allclose(wave.scaled(2.0).E(t), 2 * wave.E(t))


def test_complex_times_are_analytic():
    w = Waveform.gaussian(PulseConfig.from_user(20.0, fwhm_fs=3.0))
    t = 10.0 + 20.0j
    h = 1e-4
    # Cauchy-Riemann: derivative along the imaginary direction equals the real one
    d_re = (w.A(t + h) - w.A(t - h)) / (2 * h)
    d_im = (w.A(t + 1j * h) - w.A(t - 1j * h)) / (2j * h)
    assert d_re == pytest.approx(d_im, rel=1e-6)
    assert -d_re == pytest.approx(w.E(t), rel=1e-6)


def test_sign_validation():
    with pytest.raises(ValueError):
        Waveform.cw(1.0, 1.0, sign=2)
