import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import cumulative_simpson, quad

from attostm.config import SfaQuadrature
from attostm.errors import DomainError, QuadratureError
from attostm.junction import solve_initial_state
from attostm.pulse import Waveform
from attostm.sfa import (SfaKernel, a2_integral, a_integral, action, convergence_change, effective_momentum,
                         eta_prefactor, final_wavenumber, sfa_spectrum, xi_prefactor)
from attostm.units import AS, EV, FS, V_PER_NM, JunctionConfig, PulseConfig


@pytest.fixture
def pulse():
    return PulseConfig.from_user(35.0, fwhm_fs=1.0, cep_rad=0.3)


@pytest.fixture
def wf(pulse):
    return Waveform.gaussian(pulse, static_field=0.4 * V_PER_NM)


def mp_vector_potential(w: Waveform):
    a = 4 * mp.log(2) / mp.mpf(w.fwhm) ** 2
    amp = w.sign * mp.mpf(w.peak_field) / w.omega
    return lambda t: w.static_field * t + amp * mp.exp(-a * t * t) * mp.sin(w.omega * t + w.cep)


def test_a_integral_real_times(wf):
    t1, t2 = -20.0, 35.0
    ref, _ = quad(lambda t: -float(wf.A(t)), t1, t2, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert a_integral(t1, t2, wf) == pytest.approx(ref, rel=1e-10)


def test_a_integral_complex_times_against_mpmath(wf):
    mp.mp.dps = 30
    A = mp_vector_potential(wf)
    t1, t2 = complex(-10.0, 6.0), complex(25.0, -3.0)
    ref = -mp.quad(lambda u: A(t1 + (t2 - t1) * u) * (t2 - t1), [0, 0.25, 0.5, 0.75, 1])
    assert a_integral(t1, t2, wf) == pytest.approx(complex(ref), rel=1e-10)
    ref2 = mp.quad(lambda u: A(t1 + (t2 - t1) * u) ** 2 * (t2 - t1), [0, 0.25, 0.5, 0.75, 1])
    assert a2_integral(t1, t2, wf) == pytest.approx(complex(ref2), rel=1e-10)


def test_cw_closed_forms_against_quadrature(pulse):
    w = Waveform.cw(pulse.peak_field, pulse.omega, 0.7 * V_PER_NM, 0.9)
    t1, t2 = -40.0, 75.0
    ref, _ = quad(lambda t: -float(w.A(t)), t1, t2, epsabs=1e-12, epsrel=1e-12, limit=200)
    assert a_integral(t1, t2, w) == pytest.approx(ref, rel=1e-10)
    ref2, _ = quad(lambda t: float(w.A(t)) ** 2, t1, t2, epsabs=1e-12, epsrel=1e-12, limit=200)
    assert a2_integral(t1, t2, w) == pytest.approx(ref2, rel=1e-10)
    # entire integrand: the closed form on a complex segment matches the straight-line integral
    z1, z2 = complex(3.0, 20.0), complex(60.0, -4.0)
    mp.mp.dps = 30
    A = lambda t: w.static_field * t + (w.sign * w.peak_field / w.omega) * mp.sin(w.omega * t + w.cep)
    ref = -mp.quad(lambda u: A(z1 + (z2 - z1) * u) * (z2 - z1), [0, 0.5, 1])
    assert a_integral(z1, z2, w) == pytest.approx(complex(ref), rel=1e-10)


def test_xi_is_the_gap_overlap(wf):
    """xi = e E(t1) int_0^d x psi0(x) exp(-i q x) dx with q = p~ - e A(t1)."""
    mp.mp.dps = 30
    j = JunctionConfig.from_user(0.8)
    st = solve_initial_state(j, j.fermi_level)
    t1, p = complex(-3.0, 8.0), complex(0.9, -0.2)
    q = p + complex(wf.A(t1))
    integrand = lambda x: x * (st.B1 * mp.exp(-st.alpha * x) + st.B2 * mp.exp(st.alpha * x)) * mp.exp(-1j * q * x)
    ref = -complex(wf.E(t1)) * complex(mp.quad(integrand, [0, j.d]))
    assert xi_prefactor(t1, p, st, wf) == pytest.approx(ref, rel=1e-10)


def test_eta_is_the_surface_wronskian(wf):
    j = JunctionConfig.from_user(0.8)
    t2, p, e = 14.0, 1.3, 12 * EV
    k = final_wavenumber(e, j)
    q = p + float(wf.A(t2))
    h = 1e-5
    volkov = lambda x: np.exp(1j * q * x)
    final = lambda x: np.exp(-1j * k * x)
    dv = (volkov(j.d + h) - volkov(j.d - h)) / (2 * h)
    df = (final(j.d + h) - final(j.d - h)) / (2 * h)
    wronskian = final(j.d) * dv - volkov(j.d) * df
    assert eta_prefactor(t2, p, e, j, wf) == pytest.approx(-1j * wronskian * np.exp(-1j * q * j.d), rel=1e-8)


def test_final_wavenumber_domain():
    j = JunctionConfig.from_user(1.0, bias_V=1.0)
    assert j.static_drop == pytest.approx(1.0 * EV)
    assert final_wavenumber(3 * EV, j) == pytest.approx(math.sqrt(2 * 2 * EV))
    with pytest.raises(DomainError):
        final_wavenumber(0.5 * EV, j)


def test_action_pieces(wf):
    j = JunctionConfig.from_user(0.8)
    st = solve_initial_state(j, j.fermi_level)
    t1, t2, e = complex(-2.0, 9.0), complex(30.0, -2.0), 10 * EV
    p = effective_momentum(t1, t2, j.d, wf)
    # p~ is the mean kinetic momentum that carries the electron across the gap
    assert (p * (t2 - t1) - a_integral(t1, t2, wf)) == pytest.approx(j.d, rel=1e-12)
    s = action(t1, t2, e, st, wf)
    assert s == pytest.approx(e * t2 + p * p * (t2 - t1) / 2 - a2_integral(t1, t2, wf) / 2
                              + abs(st.energy) * t1, rel=1e-12)


def brute_force_amplitudes(j, wf, energies, tau_min, h=0.05):
    """Direct double sum on a fine uniform grid, rectangle rule in both times."""
    st = solve_initial_state(j, j.fermi_level)
    T0, T1 = wf.t_window
    t = np.arange(T0, T1 + h / 2, h)
    tf = np.linspace(T0, T1, 4 * (t.size - 1) + 1)
    C1 = cumulative_simpson(-wf.A(tf), x=tf, initial=0)[::4]
    C2 = cumulative_simpson(wf.A(tf) ** 2, x=tf, initial=0)[::4]
    tot = np.zeros(len(energies), complex)
    for i in range(t.size):
        jj = np.arange(i + 1, t.size)
        tau = t[jj] - t[i]
        keep = tau >= tau_min
        jj, tau = jj[keep], tau[keep]
        p = (C1[jj] - C1[i] + j.d) / tau
        xi = xi_prefactor(t[i], p, st, wf)
        s0 = p**2 * tau / 2 - (C2[jj] - C2[i]) / 2 + abs(st.energy) * t[i]
        base = np.sqrt(1j / (8 * np.pi * tau)) * xi * np.exp(1j * s0) * h * h
        for n, e in enumerate(energies):
            tot[n] += np.sum(base * eta_prefactor(t[jj], p, e, j, wf) * np.exp(1j * e * t[jj]))
    return tot


def test_kernel_against_brute_force():
    j = JunctionConfig.from_user(0.5)
    wf = Waveform.gaussian(PulseConfig.from_user(35.0, fwhm_fs=1.0))
    energies = np.array([5.0, 12.0, 20.0]) * EV
    kern = SfaKernel(j, wf, SfaQuadrature(tau_min=2 * AS))
    got = kern.amplitudes(energies)
    ref = brute_force_amplitudes(j, wf, energies, 2 * AS)
    np.testing.assert_allclose(got, ref, rtol=0.02)


def test_refinement_and_diagnostics():
    j = JunctionConfig.from_user(0.5)
    wf = Waveform.gaussian(PulseConfig.from_user(35.0, fwhm_fs=1.5))
    e = np.linspace(-2, 30, 65) * EV
    spec = sfa_spectrum(e, j, wf, check=True, tol=0.01, plateau=(2 * EV, 12 * EV))
    assert spec.meta["convergence_change"] < 0.01
    assert spec.meta["rejected_below_level"] == int(np.sum(e < 0))
    assert np.all(spec.values[e < 0] == 0)
    assert spec.meta["diagnostics"]["tail_estimate"] < 1e-4
    assert convergence_change(spec, spec) == 0.0


def test_field_reversal_equals_cep_shift():
    j = JunctionConfig.from_user(0.5)
    p = PulseConfig.from_user(30.0, fwhm_fs=1.5, cep_rad=0.7)
    e = np.linspace(0.5, 25, 20) * EV
    a = sfa_spectrum(e, j, Waveform.gaussian(p, sign=-1))
    b = sfa_spectrum(e, j, Waveform.gaussian(p.with_(cep=0.7 + math.pi)))
    np.testing.assert_allclose(a.values, b.values, rtol=1e-9)


def test_kernel_input_checks():
    j = JunctionConfig.from_user(0.5)
    p = PulseConfig.from_user(30.0, fwhm_fs=1.5)
    with pytest.raises(DomainError):
        SfaKernel(j, Waveform.cw(p.peak_field, p.omega))
    with pytest.raises(QuadratureError):
        SfaKernel(j, Waveform.gaussian(p), SfaQuadrature(tau_min=5 * FS))
