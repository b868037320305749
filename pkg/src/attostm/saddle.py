"""Complex saddle points of the SFA action, travel-time asymptotics, cutoff law and trajectories.

The three stationarity conditions in (t1, t2, p~):

    f1 = (p~ - eA(t1))^2 / 2m + |E0|      (tunnel entry)
    f2 = int_{t1}^{t2} (p~ - eA)/m dtau - d (gap crossing)
    f3 = (p~ - eA(t2))^2 / 2m - E          (arrival energy)

are solved together by damped Newton steps with the analytic Jacobian.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .pulse import WaveKind, Waveform
from .sfa import a_integral, a2_integral
from .units import AS, E_CHARGE, EV, MASS, NM, JunctionConfig

_TOL = 1e-10


@dataclass(frozen=True)
class SaddleSolution:
    energy: float
    t1: complex
    t2: complex
    p: complex
    residuals: tuple
    branch: int
    action: complex
    damping: str

    @property
    def tau(self) -> complex:
        return self.t2 - self.t1

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)


def _residuals(x, e, e0abs, d, wf):
    t1, t2, p = x
    q1 = p - E_CHARGE * wf.A(t1)
    q2 = p - E_CHARGE * wf.A(t2)
    f1 = q1 * q1 / (2 * MASS) + e0abs
    f2 = (p * (t2 - t1) - a_integral(t1, t2, wf)) / MASS - d
    f3 = q2 * q2 / (2 * MASS) - e
    return np.array([f1, f2, f3], dtype=complex)


def _jacobian(x, wf):
    t1, t2, p = x
    q1 = p - E_CHARGE * wf.A(t1)
    q2 = p - E_CHARGE * wf.A(t2)
    # d(-eA)/dt = e E(t)
    return np.array([
        [q1 * E_CHARGE * wf.E(t1) / MASS, 0.0, q1 / MASS],
        [-q1 / MASS, q2 / MASS, (t2 - t1) / MASS],
        [0.0, q2 * E_CHARGE * wf.E(t2) / MASS, q2 / MASS],
    ], dtype=complex)


def _newton(x, e, e0abs, d, wf, max_iter=80):
    f = _residuals(x, e, e0abs, d, wf)
    norm = np.linalg.norm(f)
    for _ in range(max_iter):
        if norm < 1e-13:
            break
        try:
            step = np.linalg.solve(_jacobian(x, wf), -f)
        except np.linalg.LinAlgError:
            return x, np.inf
        lam = 1.0
        while lam > 1e-4:
            xn = x + lam * step
            fn = _residuals(xn, e, e0abs, d, wf)
            nn = np.linalg.norm(fn)
            if np.isfinite(nn) and nn < norm:
                break
            lam *= 0.5
        else:
            return x, norm
        x, f, norm = xn, fn, nn
    return x, norm


def saddle_action(t1, t2, p, e, e0abs, wf) -> complex:
    """S at a saddle: E t2 + p^2 tau/2m - int e^2 A^2/2m + |E0| t1."""
    tau = t2 - t1
    return complex(e * t2 + p * p * tau / (2 * MASS) - a2_integral(t1, t2, wf) / (2 * MASS) + e0abs * t1)


def _crests(wf: Waveform):
    """Times of the field crests, one per half cycle, with their half-cycle index."""
    if wf.kind is WaveKind.CW:
        n = range(-1, 2)
    else:
        t0, t1 = wf.t_window
        n = range(int(math.floor((t0 * wf.omega + wf.cep) / math.pi)),
                  int(math.ceil((t1 * wf.omega + wf.cep) / math.pi)) + 1)
    out = []
    for k in n:
        tc = (k * math.pi - wf.cep) / wf.omega
        if wf.kind is WaveKind.GAUSSIAN and not (wf.t_window[0] <= tc <= wf.t_window[1]):
            continue
        if wf.kind is WaveKind.GAUSSIAN and abs(wf.envelope(tc)) < 1e-3:
            continue
        out.append((k, tc))
    return out


def solve_saddles(e: float, e0: float, j: JunctionConfig, waveform: Waveform,
                  keep_growing: bool = False, diagnostics: dict | None = None) -> list[SaddleSolution]:
    """All distinct decaying saddles reachable from per-half-cycle seeds, sorted by Re t1."""
    e0abs = abs(e0)
    alpha = math.sqrt(2 * MASS * e0abs)
    d = j.d
    found: list[SaddleSolution] = []
    tried = 0
    for branch, tc in _crests(waveform):
        f_loc = abs(float(np.real(waveform.E(tc)))) + abs(waveform.static_field)
        if f_loc == 0:
            continue
        k_e = math.sqrt(2 * MASS * max(e, 1e-6))
        for s1 in (1, -1):
            for s2 in (1, -1):
                t1 = tc + 1j * s1 * alpha / f_loc
                tau = 2 * MASS * d / (k_e + 1j * s2 * alpha)
                t2 = t1 + tau
                p = (MASS * d + a_integral(t1, t2, waveform)) / tau
                tried += 1
                x, res = _newton(np.array([t1, t2, p], dtype=complex), e, e0abs, d, waveform)
                if not res < _TOL:
                    continue
                t1s, t2s, ps = (complex(v) for v in x)
                if not t2s.real > t1s.real:
                    continue
                if any(abs(t1s - s.t1) < 1e-6 and abs(t2s - s.t2) < 1e-6 for s in found):
                    continue
                r = tuple(complex(v) for v in _residuals(x, e, e0abs, d, waveform))
                S = saddle_action(t1s, t2s, ps, e, e0abs, waveform)
                damp = "decaying" if S.imag >= 0 else "growing"
                found.append(SaddleSolution(e, t1s, t2s, ps, r, branch, S, damp))
    kept = [s for s in found if keep_growing or s.damping == "decaying"]
    kept.sort(key=lambda s: (s.t1.real, s.max_residual))
    if diagnostics is not None:
        diagnostics.update(seeds=tried, converged=len(found), kept=len(kept))
    return kept


def dominant_saddle(solutions: list[SaddleSolution]) -> SaddleSolution:
    """The decaying saddle with the smallest damping exponent Im S."""
    if not solutions:
        raise DomainError("no saddle point found")
    return min(solutions, key=lambda s: s.action.imag)


def follow_saddle(start: SaddleSolution, energies, e0: float, j: JunctionConfig, waveform: Waveform,
                  max_step: float = 0.25 * EV) -> list[SaddleSolution]:
    """Continue one saddle family in E, using each root as the seed of the next.

    Large energy gaps are bridged with intermediate Newton solves so the
    iteration cannot hop to a neighbouring family.
    """
    e0abs = abs(e0)
    out = []
    x = np.array([start.t1, start.t2, start.p], dtype=complex)
    e_prev = start.energy
    for e in energies:
        n = max(1, int(math.ceil(abs(e - e_prev) / max_step)))
        for ee in np.linspace(e_prev, e, n + 1)[1:]:
            x, res = _newton(x, ee, e0abs, j.d, waveform)
            if not res < _TOL:
                raise DomainError("saddle continuation lost the root", {"energy_eV": ee / EV, "residual": res})
        e_prev = e
        t1s, t2s, ps = (complex(v) for v in x)
        r = tuple(complex(v) for v in _residuals(x, e, e0abs, j.d, waveform))
        S = saddle_action(t1s, t2s, ps, e, e0abs, waveform)
        out.append(SaddleSolution(e, t1s, t2s, ps, r, start.branch, S,
                                  "decaying" if S.imag >= 0 else "growing"))
    return out


def main_branch(energies, e0: float, j: JunctionConfig, waveform: Waveform,
                e_start: float | None = None) -> list[SaddleSolution]:
    """The direct-tunneling family followed in E.

    It is picked at ``e_start`` (default: a third of the cutoff, or 5 eV) as
    the decaying root with Im tau < 0 closest to the crest that pushes
    electrons hardest towards the sample, then continued up and down in E.
    """
    energies = np.asarray(energies, dtype=float)
    if e_start is None:
        try:
            e_start = max(cutoff_energy(j, waveform, e0) / 3.0, 1.0 * EV)
        except DomainError:
            e_start = 5.0 * EV
    crests = _crests(waveform)
    push = [float(np.real(E_CHARGE * waveform.E(tc))) for _, tc in crests]
    t_best = crests[int(np.argmax(push))][1]
    sols = [s for s in solve_saddles(e_start, e0, j, waveform) if s.tau.imag < 0]
    if not sols:
        raise DomainError("no decaying saddle at the starting energy", {"energy_eV": e_start / EV})
    start = min(sols, key=lambda s: (abs(s.t1.real - t_best), s.action.imag))
    order = np.argsort(energies)
    up = [e for e in energies[order] if e >= e_start]
    down = [e for e in energies[order][::-1] if e < e_start]
    res = {e: s for e, s in zip(up, follow_saddle(start, up, e0, j, waveform))}
    res.update({e: s for e, s in zip(down, follow_saddle(start, down, e0, j, waveform))})
    return [res[e] for e in energies]


# -- asymptotics and cutoff ---------------------------------------------------

def _total_field(waveform: Waveform) -> float:
    return waveform.static_field + waveform.peak_field


def travel_time_asymptotics(e: float, e0: float, j: JunctionConfig, waveform: Waveform) -> dict:
    """Low-energy (Keldysh-time) and high-energy (short-flight) travel-time estimates.

    ``low_E`` carries only the imaginary part, which is all the estimate fixes.
    """
    alpha = math.sqrt(2 * MASS * abs(e0))
    low = -1j * alpha / (abs(E_CHARGE) * _total_field(waveform))
    high = 2 * MASS * j.d / (math.sqrt(2 * MASS * max(e, 0.0)) + 1j * alpha)
    return {"low_E": complex(low), "high_E": complex(high)}


def cutoff_energy(j: JunctionConfig, waveform: Waveform, e0: float) -> float:
    """Classical cutoff |e|(F0 + F) d - |E0|; raises DomainError when there is no plateau."""
    ec = abs(E_CHARGE) * _total_field(waveform) * j.d - abs(e0)
    if ec < 0:
        raise DomainError("no classical plateau: cutoff below the vacuum level",
                          {"cutoff_eV": ec / EV})
    return ec


def asymptote_crossing(j: JunctionConfig, waveform: Waveform, e0: float) -> float:
    """Energy where the two imaginary travel-time estimates meet (closed form)."""
    from scipy.optimize import brentq

    g = lambda e: (travel_time_asymptotics(e, e0, j, waveform)["high_E"].imag  # noqa: E731
                   - travel_time_asymptotics(e, e0, j, waveform)["low_E"].imag)
    hi = 10 * abs(E_CHARGE) * _total_field(waveform) * j.d + 10 * abs(e0)
    if g(0.0) * g(hi) > 0:
        raise DomainError("travel-time estimates do not cross")
    return brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-15)


# -- trajectories ---------------------------------------------------------------

@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    leg: np.ndarray
    solution: SaddleSolution = field(repr=False, default=None)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_as", "re_x_nm", "im_x_nm", "leg"])
        for t, x, leg in zip(self.t, self.x, self.leg):
            w.writerow([f"{t.real / AS:.10g}", f"{x.real / NM:.10g}", f"{x.imag / NM:.10g}", leg])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def displacement(s: SaddleSolution, t, waveform: Waveform) -> complex:
    """D(t) = int_{t1s}^{t} (p~ - eA)/m along the straight line from t1s."""
    return complex((s.p * (t - s.t1) - a_integral(s.t1, t, waveform)) / MASS)


def trajectory(s: SaddleSolution, waveform: Waveform, n_samples: int = 64, via: float | None = None) -> Trajectory:
    """Three legs: t1s -> Re t1s (tunneling), along the real axis (classical), Re t2s -> t2s (attenuation).

    Each point is the running integral of the previous one plus one leg segment,
    so the path really follows the contour.  ``via`` moves the real-axis start
    away from Re t1s (contour-independence checks).
    """
    start = complex(s.t1.real if via is None else via)
    corners = [s.t1, start, complex(s.t2.real), s.t2]
    labels = ["tunneling", "classical", "attenuation"]
    ts, xs, legs = [], [], []
    x = 0j
    prev = s.t1
    for a, b, lab in zip(corners[:-1], corners[1:], labels):
        for u in np.linspace(0.0, 1.0, n_samples):
            t = a + (b - a) * u
            x = x + (s.p * (t - prev) - a_integral(prev, t, waveform)) / MASS if t != prev else x
            prev = t
            ts.append(t)
            xs.append(x)
            legs.append(lab)
    return Trajectory(np.array(ts), np.array(xs), np.array(legs), s)


def saddles_to_csv(solutions, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["energy_eV", "re_t1_as", "im_t1_as", "re_t2_as", "im_t2_as", "re_p", "im_p", "branch", "damping"])
    for s in solutions:
        w.writerow([f"{s.energy / EV:.10g}", f"{s.t1.real / AS:.10g}", f"{s.t1.imag / AS:.10g}",
                    f"{s.t2.real / AS:.10g}", f"{s.t2.imag / AS:.10g}", f"{s.p.real:.10g}", f"{s.p.imag:.10g}",
                    s.branch, s.damping])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def travel_time_table(energies, e0, j: JunctionConfig, waveform: Waveform):
    """Exact dominant-saddle travel times next to the two estimates, one row per energy."""
    rows = []
    for e in energies:
        sols = solve_saddles(e, e0, j, waveform)
        exact = dominant_saddle(sols).tau if sols else complex("nan")
        est = travel_time_asymptotics(e, e0, j, waveform)
        rows.append((e, exact, est["low_E"], est["high_E"]))
    return rows

