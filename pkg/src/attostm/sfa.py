"""Strong-field-approximation amplitude of laser-induced tunneling.

M_E = int dt2 int_{t1<t2} dt1 sqrt(i / (8 pi m hbar^3 tau)) eta(t2) xi(t1) exp(i S / hbar),
tau = t2 - t1.  Only eta and the E t2 term of S depend on the final energy E, so
the E-independent rest is accumulated once onto a uniform t2 grid and every
energy then costs a 1-D sum.

Quadrature: the t1 axis is uniform (step ``dt_quad``).  Near the diagonal the
phase m d^2 / (2 tau) oscillates without bound, so tau runs over nodes that are
uniform in N(tau) = tau/h - c/tau (constant phase increment per node, step
never above h) from ``tau_min`` up to a switch point; beyond it tau is uniform
with step h, so t2 falls on the t1 grid.  Off-grid t2 values are spread onto
that grid with 6-point Lagrange weights, which interpolate exp(i E t2) to about
1e-4 at the default step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .config import SfaQuadrature
from .errors import DomainError, PoleError, QuadratureError
from .junction import StaticEigenstate, solve_initial_state
from .pulse import WaveKind, Waveform
from .spectrum import Spectrum
from .units import E_CHARGE, EV, HBAR, MASS, JunctionConfig

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_PANEL = 4.0   # a.u.; Gauss-Legendre panel length for the generic A integrals


def _panels(t1, t2, width=_PANEL):
    t1, t2 = complex(t1), complex(t2)
    n = max(1, int(math.ceil(abs(t2 - t1) / width)))
    edges = t1 + (t2 - t1) * np.arange(n + 1) / n
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def _real_if(t1, t2, value):
    if not (np.iscomplexobj(t1) or np.iscomplexobj(t2) or isinstance(t1, complex) or isinstance(t2, complex)):
        return float(np.real(value))
    return complex(value)


def a_integral(t1, t2, waveform: Waveform):
    """int_{t1}^{t2} e A(tau) dtau along the straight line (complex endpoints allowed)."""
    if waveform.kind is WaveKind.CW:
        w, ph, F0 = waveform.omega, waveform.cep, waveform.static_field
        amp = waveform.sign * waveform.peak_field / w
        val = 0.5 * F0 * (t2 * t2 - t1 * t1) - amp / w * (np.cos(w * t2 + ph) - np.cos(w * t1 + ph))
        return _real_if(t1, t2, E_CHARGE * val)
    nodes, weights = _panels(t1, t2)
    return _real_if(t1, t2, E_CHARGE * np.sum(weights * waveform.A(nodes)))


def a2_integral(t1, t2, waveform: Waveform):
    """int_{t1}^{t2} e^2 A(tau)^2 dtau."""
    if waveform.kind is WaveKind.CW:
        w, ph, F0 = waveform.omega, waveform.cep, waveform.static_field
        a = waveform.sign * waveform.peak_field / w

        def prim(t):
            s = w * t + ph
            return (F0 * F0 * t**3 / 3.0
                    + 2 * F0 * a * (-t * np.cos(s) / w + np.sin(s) / w**2)
                    + a * a * (0.5 * t - np.sin(2 * s) / (4 * w)))
        return _real_if(t1, t2, E_CHARGE**2 * (prim(t2) - prim(t1)))
    nodes, weights = _panels(t1, t2)
    return _real_if(t1, t2, E_CHARGE**2 * np.sum(weights * waveform.A(nodes) ** 2))


def effective_momentum(t1, t2, d, waveform: Waveform):
    """p~ = (int e A + m d) / (t2 - t1)."""
    return (a_integral(t1, t2, waveform) + MASS * d) / (t2 - t1)


def xi_prefactor(t1, p_tilde, state: StaticEigenstate, waveform: Waveform):
    """Emission prefactor: overlap of the evanescent gap state with a Volkov wave, times e E(t1)."""
    q = p_tilde - E_CHARGE * waveform.A(t1)
    a, d = state.alpha, state.d
    total = 0.0
    for B, z in ((state.B1, q - 1j * a), (state.B2, q + 1j * a)):
        z = np.asarray(z)
        if np.any(np.abs(z) == 0.0):
            raise PoleError("p~ - eA(t1) hits +-i alpha", {"t1": t1, "p_tilde": p_tilde})
        ph = np.exp(-1j * z * d / HBAR)
        total = total + B * HBAR**2 * (-1.0 + (1.0 + 1j * z * d / HBAR) * ph) / z**2
    out = E_CHARGE * waveform.E(t1) * total
    return complex(out) if np.ndim(out) == 0 else out


def final_wavenumber(e, j: JunctionConfig) -> float:
    """sqrt(2m(E - U_s)) / hbar with U_s the potential energy at the sample surface; principal branch."""
    level = j.static_drop
    if e < level:
        raise DomainError(f"E={e!r} below the sample-surface level {level!r}: no propagating final state")
    return math.sqrt(2 * MASS * (e - level)) / HBAR


def eta_prefactor(t2, p_tilde, e, j: JunctionConfig, waveform: Waveform):
    """Arrival prefactor: Wronskian of the Volkov wave with the final plane wave at x = d."""
    k = final_wavenumber(e, j)
    out = (p_tilde - E_CHARGE * waveform.A(t2) + HBAR * k) * np.exp(-1j * k * j.d)
    return complex(out) if np.ndim(out) == 0 else out


def action(t1, t2, e, state: StaticEigenstate, waveform: Waveform):
    tau = t2 - t1
    p = effective_momentum(t1, t2, state.d, waveform)
    return (e * t2 + p * p * tau / (2 * MASS) - a2_integral(t1, t2, waveform) / (2 * MASS)
            + abs(state.energy) * t1)


# -- quadrature kernel --------------------------------------------------------

@numba.njit(cache=True)
def _avec(t, F0, amp, a, w, cep):
    return F0 * t + amp * math.exp(-a * t * t) * math.sin(w * t + cep)


@numba.njit(cache=True)
def _efield(t, F0, amp, a, w, cep):
    g = math.exp(-a * t * t)
    ph = w * t + cep
    return -F0 - amp * w * g * (math.cos(ph) - (2.0 * a * t / w) * math.sin(ph))


@numba.njit(cache=True)
def _accumulate(T0, h, n, wf, d, alpha, B1, B2, C2, e0abs, C1, C2t, tau_n, w_n, k_n, rho_n,
                lag_w, lag_m0, n_sw, glx, glw, pad, H0, H1):
    F0, amp, a, w, cep = wf[0], wf[1], wf[2], wf[3], wf[4]
    eminus = math.exp(-alpha * d)
    pref = (math.sqrt(0.5) + 0.5j * math.sqrt(2.0)) / math.sqrt(8.0 * math.pi)
    T1 = T0 + n * h
    agrid = np.empty(n + 1)
    for k in range(n + 1):
        agrid[k] = _avec(T0 + k * h, F0, amp, a, w, cep)
    for i in range(n + 1):
        t1 = T0 + i * h
        e1 = _efield(t1, F0, amp, a, w, cep)
        if e1 == 0.0:
            continue
        a1 = agrid[i]
        wt1 = h if 0 < i < n else 0.5 * h
        for m in range(tau_n.size + n + 1):
            if m < tau_n.size:
                tau = tau_n[m]
                t2 = t1 + tau
                if t2 > T1 + 1e-9 * h:
                    continue
                kk = i + k_n[m]
                base = T0 + kk * h
                span = rho_n[m] * h
                ia, ia2 = 0.0, 0.0
                for g in range(glx.size):
                    av = _avec(base + 0.5 * span * (1.0 + glx[g]), F0, amp, a, w, cep)
                    ia += glw[g] * av
                    ia2 += glw[g] * av * av
                ia = C1[kk] - C1[i] + 0.5 * span * ia
                ia2 = C2t[kk] - C2t[i] + 0.5 * span * ia2
                a2 = _avec(t2, F0, amp, a, w, cep)
                wt = wt1 * w_n[m]
            else:
                jj = m - tau_n.size + n_sw
                if jj > n - i:
                    break
                tau = jj * h
                ia = C1[i + jj] - C1[i]
                ia2 = C2t[i + jj] - C2t[i]
                a2 = agrid[i + jj]
                wt = wt1 * (0.5 * h if (jj == n_sw or jj == n - i) else h)
            # e = -1: int e A = -ia, p~ - eA = p~ + A
            p = (d - ia) / tau
            q = p + a1
            eqd = np.exp(-1j * q * d)
            z1 = q - 1j * alpha
            z2 = q + 1j * alpha
            br = B1 * (-1.0 + (1.0 + 1j * z1 * d) * eqd * eminus) / (z1 * z1)
            br += (-B2 + C2 * (1.0 + 1j * z2 * d) * eqd) / (z2 * z2)
            xi = -e1 * br
            s = 0.5 * p * p * tau - 0.5 * ia2 + e0abs * t1
            val = wt * pref / math.sqrt(tau) * xi * np.exp(1j * s)
            pv = val * (p + a2)
            if m < tau_n.size:
                for u in range(6):
                    idx = pad + i + lag_m0[m] + u
                    H0[idx] += val * lag_w[m, u]
                    H1[idx] += pv * lag_w[m, u]
            else:
                H0[pad + i + jj] += val
                H1[pad + i + jj] += pv


def _lagrange6(r):
    m0 = int(math.floor(r)) - 2
    nodes = m0 + np.arange(6)
    wts = np.ones(6)
    for s in range(6):
        for u in range(6):
            if u != s:
                wts[s] *= (r - nodes[u]) / (nodes[s] - nodes[u])
    return m0, wts


@dataclass
class SfaKernel:
    """E-independent part of the double time integral for one junction and waveform."""

    junction: JunctionConfig
    waveform: Waveform
    quad: SfaQuadrature = field(default_factory=SfaQuadrature)
    e0: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        j, wf, quad = self.junction, self.waveform, self.quad
        if wf.kind is not WaveKind.GAUSSIAN:
            raise DomainError("the SFA quadrature needs a pulse with a finite window")
        e0 = j.fermi_level if self.e0 is None else self.e0
        self.state = solve_initial_state(j, e0)
        T0, T1 = wf.t_window
        n = max(8, int(math.ceil((T1 - T0) / quad.dt_quad)))
        h = (T1 - T0) / n
        d = j.d
        # cumulative integrals of A and A^2 on the t1 grid
        edges = T0 + h * np.arange(n + 1)
        nodes = 0.5 * (edges[:-1, None] + edges[1:, None]) + 0.5 * h * _GL_X[None, :]
        av = wf.A(nodes)
        C1 = np.concatenate([[0.0], np.cumsum(0.5 * h * (av @ _GL_W))])
        C2 = np.concatenate([[0.0], np.cumsum(0.5 * h * ((av * av) @ _GL_W))])
        # near-diagonal nodes, uniform in N(tau) = tau/h - c/tau
        dphi = 1.2 * h
        c = MASS * d * d / (2 * dphi)
        tau_sw = quad.u_switch if quad.u_switch is not None else math.sqrt(2 * d * d * h / dphi)
        n_sw = max(2, int(math.ceil(tau_sw / h)))
        tau_sw = n_sw * h
        if quad.tau_min >= tau_sw:
            raise QuadratureError("tau_min must lie below the near-diagonal switch point",
                                  {"tau_min": quad.tau_min, "tau_switch": tau_sw})
        big_n = lambda t: t / h - c / t  # noqa: E731
        na, nb = big_n(quad.tau_min), big_n(tau_sw)
        m = int(math.ceil(nb - na)) + 1
        grid = np.linspace(na, nb, m)
        tau = 0.5 * (grid * h + np.sqrt((grid * h) ** 2 + 4 * c * h))
        tau[-1] = tau_sw
        jac = 1.0 / (1.0 / h + c / tau**2)
        wts = jac * (grid[1] - grid[0])
        wts[[0, -1]] *= 0.5
        r = tau / h
        k_n = np.minimum(np.floor(r).astype(np.int64), n)
        rho = r - k_n
        lag = [_lagrange6(x) for x in r]
        lag_m0 = np.array([x[0] for x in lag], dtype=np.int64)
        lag_w = np.array([x[1] for x in lag])
        pad = 3
        H0 = np.zeros(n + 1 + 2 * pad, dtype=np.complex128)
        H1 = np.zeros_like(H0)
        amp = wf.sign * wf.peak_field / wf.omega
        wfp = np.array([wf.static_field, amp, wf._a, wf.omega, wf.cep])
        st = self.state
        c2 = st.B2 * math.exp(st.alpha * d) if st.alpha * d < 700 else 0.0
        _accumulate(T0, h, n, wfp, d, st.alpha, complex(st.B1), complex(st.B2), complex(c2), abs(st.energy),
                    C1, C2, tau, wts, k_n, rho, lag_w, lag_m0, n_sw, _GL_X, _GL_W, pad, H0, H1)
        if not (np.all(np.isfinite(H0)) and np.all(np.isfinite(H1))):
            raise QuadratureError("non-finite SFA accumulation", {"dt_quad": h})
        self._t = T0 + h * (np.arange(H0.size) - pad)
        self._H0, self._H1 = H0, H1
        env_edge = max(abs(float(wf.envelope(T0))), abs(float(wf.envelope(T1))))
        self.diagnostics.update(dt_quad=h, n_t1=n + 1, near_diagonal_nodes=int(tau.size), tau_switch=tau_sw,
                                tau_min=quad.tau_min, window=(T0, T1), tail_estimate=env_edge)

    def amplitudes(self, e_grid) -> np.ndarray:
        e_grid = np.atleast_1d(np.asarray(e_grid, dtype=float))
        out = np.zeros(e_grid.size, dtype=np.complex128)
        level = self.junction.static_drop
        for lo in range(0, e_grid.size, 64):
            e = e_grid[lo:lo + 64]
            ok = e >= level
            k = np.sqrt(2 * MASS * np.maximum(e - level, 0.0)) / HBAR
            ph = np.exp(1j * np.outer(e, self._t) / HBAR)
            amp = (ph @ self._H1 + HBAR * k * (ph @ self._H0)) * np.exp(-1j * k * self.junction.d)
            out[lo:lo + 64] = np.where(ok, amp / HBAR**2, 0.0)
        return out

    def spectrum(self, e_grid) -> Spectrum:
        e_grid = np.asarray(e_grid, dtype=float)
        amps = self.amplitudes(e_grid)
        level = self.junction.static_drop
        k = np.sqrt(2 * MASS * np.maximum(e_grid - level, 0.0)) / HBAR
        v = HBAR * k / MASS
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.where(v > 0, np.abs(amps) ** 2 / (2 * np.pi * HBAR * np.where(v > 0, v, 1.0)), 0.0)
        meta = {"amplitudes": amps, "diagnostics": dict(self.diagnostics),
                "quad": {"tau_min_as": self.quad.tau_min, "dt_quad_as": self.quad.dt_quad},
                "rejected_below_level": int(np.sum(e_grid < level))}
        return Spectrum(e_grid, dens, "sfa", meta=meta)


def sfa_amplitude(e, state: StaticEigenstate | None, j: JunctionConfig, waveform: Waveform,
                  quad: SfaQuadrature | None = None) -> complex:
    final_wavenumber(e, j)
    kern = SfaKernel(j, waveform, quad or SfaQuadrature(), None if state is None else state.energy)
    return complex(kern.amplitudes([e])[0])


def sfa_spectrum(e_grid, j: JunctionConfig, waveform: Waveform, quad: SfaQuadrature | None = None,
                 e0: float | None = None, check: bool = False, tol: float = 0.01,
                 plateau: tuple[float, float] | None = None) -> Spectrum:
    """SFA spectrum on ``e_grid``; energies below the sample-surface level get zero density.

    ``check`` repeats the integral with dt_quad and tau_min halved and raises
    QuadratureError if the densities on ``plateau`` move by more than ``tol``.
    """
    quad = quad or SfaQuadrature()
    spec = SfaKernel(j, waveform, quad, e0).spectrum(e_grid)
    if check:
        fine = SfaKernel(j, waveform, quad.refined(), e0).spectrum(e_grid)
        change = convergence_change(spec, fine, plateau)
        spec.meta["convergence_change"] = change
        if not change < tol:
            raise QuadratureError("SFA integral not converged under refinement",
                                  {"relative_change": change, "tol": tol})
    return spec


def convergence_change(coarse: Spectrum, fine: Spectrum, plateau=None) -> float:
    """Largest relative change of the density over ``plateau`` (default: 5 eV up to 25 eV)."""
    lo, hi = plateau or (5.0 * EV, 25.0 * EV)
    sel = (coarse.e_grid >= lo) & (coarse.e_grid <= hi)
    a, b = coarse.values[sel], fine.values[sel]
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / np.maximum(b, 1e-300)))
