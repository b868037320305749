"""Crank-Nicolson propagation of the 1-D junction TDSE and its observables.

Grid points sit at integer multiples of ``dx`` so that both metal surfaces
(x = 0 and x = d) are grid points.  The Hamiltonian uses the three-point
Laplacian with hard walls one step beyond the outermost points, and the
potential of each step is evaluated at the step's temporal midpoint.

Laser runs use the scattered-wave split Psi_n = c^n Psi0 + Phi_n where Psi0
is the discrete stationary state and c the Crank-Nicolson phase factor of
its energy.  Phi obeys the same scheme with a source term and starts at
zero, so the laser-induced wave is obtained without subtracting two large
numbers, and the finite box only acts on what the laser emits.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .config import GridConfig
from .errors import ConfigError, DetectionError, DomainError, NumericError
from .junction import PotentialProfile, build_potential
from .pulse import Waveform
from .spectrum import Spectrum
from .units import E_CHARGE, FS, HBAR, MASS, NM, JunctionConfig, PulseConfig


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid x_j = j*dx for j = -n_left .. n_right."""

    dx: float
    n_left: int
    n_right: int

    def __post_init__(self):
        if not self.dx > 0 or self.n_left < 1 or self.n_right < 1:
            raise ConfigError("grid needs a positive step and points on both sides of x = 0")

    @classmethod
    def from_span(cls, dx, x_min, x_max) -> "SpatialGrid":
        nl, nr = -x_min / dx, x_max / dx
        if abs(nl - round(nl)) > 1e-6 or abs(nr - round(nr)) > 1e-6:
            raise ConfigError("grid ends must be integer multiples of dx")
        return cls(dx, int(round(nl)), int(round(nr)))

    @classmethod
    def for_junction(cls, j: JunctionConfig, grid: GridConfig) -> "SpatialGrid":
        nd = j.d / grid.dx
        if abs(nd - round(nd)) > 1e-6:
            raise ConfigError(f"junction width {j.d / NM:g} nm is not a multiple of dx={grid.dx / NM:g} nm")
        n = int(math.ceil(grid.x_span / grid.dx - 1e-9))
        return cls(grid.dx, n, max(n, int(round(nd)) + 2))

    @property
    def n_points(self) -> int:
        return self.n_left + self.n_right + 1

    @property
    def x_min(self) -> float:
        return -self.n_left * self.dx

    @property
    def x_max(self) -> float:
        return self.n_right * self.dx

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_left) * self.dx

    def index(self, x: float) -> int:
        q = x / self.dx
        if abs(q - round(q)) > 1e-6:
            raise DomainError(f"x={x!r} is not a grid point")
        i = int(round(q)) + self.n_left
        if not 0 <= i < self.n_points:
            raise DomainError(f"x={x!r} outside the grid")
        return i


@dataclass(frozen=True)
class TimeAxis:
    t0: float
    dt: float
    n_steps: int

    @classmethod
    def covering(cls, t0, t1, dt_max) -> "TimeAxis":
        if not t1 >= t0:
            raise DomainError("time interval must be increasing")
        if t1 == t0:
            return cls(t0, dt_max, 0)
        n = int(math.ceil((t1 - t0) / dt_max - 1e-9))
        return cls(t0, (t1 - t0) / n, n)

    @property
    def t1(self) -> float:
        return self.t0 + self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.t0 + self.dt * (np.arange(self.n_steps) + 0.5)


@dataclass
class WaveField:
    grid: SpatialGrid
    psi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.psi = np.ascontiguousarray(self.psi, dtype=np.complex128)
        if self.psi.shape[0] != self.grid.n_points:
            raise DomainError("amplitude array does not match the grid")

    def norm(self) -> float:
        return float(self.grid.dx * np.sum(np.abs(self.psi) ** 2))

    def probability(self, mask) -> float:
        return float(self.grid.dx * np.sum(np.abs(self.psi[mask]) ** 2))

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.psi.copy(), self.t)

    def edge_ratio(self) -> float:
        """Largest wall amplitude relative to the peak amplitude."""
        a = np.abs(self.psi)
        peak = a.max()
        return 0.0 if peak == 0 else float(max(a[0], a[-1]) / peak)


class CnPropagator:
    """Discretised Hamiltonian H(t) = T + V0 + E(t) * shape for one potential variant.

    ``variant`` is ``"full"`` (V) or ``"is"`` (V_Is, metal wells removed).
    """

    def __init__(self, grid: SpatialGrid, potential: PotentialProfile, variant="full"):
        if variant not in ("full", "is"):
            raise DomainError(f"unknown potential variant {variant!r}")
        x = grid.x
        v0 = potential.v0(x)
        if variant == "is":
            v0 = v0 - potential.well_depth(x)
        self.grid = grid
        self.potential = potential
        self.variant = variant
        self.v0 = np.ascontiguousarray(v0, dtype=float)
        self.shape = np.ascontiguousarray(-E_CHARGE * potential.interaction_shape(x), dtype=float)
        self._cp = np.empty(grid.n_points, dtype=np.complex128)
        self._dp = np.empty(grid.n_points, dtype=np.complex128)
        self._zero = np.zeros(grid.n_points, dtype=np.complex128)

    def fields(self, t) -> np.ndarray:
        return np.asarray(self.potential.laser_field(np.asarray(t, dtype=float)), dtype=float)

    def diagonal(self, t) -> np.ndarray:
        return self.v0 + float(self.fields(t)) * self.shape

    def step(self, psi, t_mid, dt, out=None, base=None, scoef=0.0, backward=False):
        out = np.empty_like(psi) if out is None else out
        g = (-0.5j if backward else 0.5j) * dt / HBAR
        _kernels.cn_step(psi, self.v0, self.shape, float(self.fields(t_mid)),
                         self._zero if base is None else base, complex(scoef),
                         self.grid.dx, g, out, self._cp, self._dp)
        return out


Observer = Callable[[int, float, np.ndarray, np.ndarray], None]


def _check_finite(psi, what):
    if not np.isfinite(psi).all():
        raise NumericError(f"non-finite amplitudes during {what}")


def _with_waveform(potential: PotentialProfile, waveform: Waveform | None) -> PotentialProfile:
    return potential if waveform is None else replace(potential, waveform=waveform)


def step(state: WaveField, potential: PotentialProfile, dt: float, waveform: Waveform | None = None,
         variant="full") -> WaveField:
    prop = CnPropagator(state.grid, _with_waveform(potential, waveform), variant)
    out = prop.step(state.psi, state.t + 0.5 * dt, dt)
    _check_finite(out, "a Crank-Nicolson step")
    return WaveField(state.grid, out, state.t + dt)


def _march(prop: CnPropagator, psi, axis: TimeAxis, observers: Sequence[Observer] = (),
           base=None, scoefs=None, source=None, backward=False, check_every=500):
    """Advance ``psi`` across ``axis`` (forward, or backward from axis.t1 to axis.t0).

    Observers get (interval index m, midpoint time, psi at t_m, psi at t_{m+1}).
    """
    dt = axis.dt
    mids = axis.midpoints
    fvals = prop.fields(mids) if axis.n_steps else np.zeros(0)
    a = np.array(psi, dtype=np.complex128, copy=True)
    b = np.empty_like(a)
    g = (-0.5j if backward else 0.5j) * dt / HBAR
    zero = prop._zero
    order = range(axis.n_steps - 1, -1, -1) if backward else range(axis.n_steps)
    multi = a.ndim == 2
    if multi:
        n, k = a.shape
        rinv = np.empty(n, dtype=np.complex128)
        dp2 = np.empty((n, k), dtype=np.complex128)
    for count, m in enumerate(order, 1):
        if multi:
            _kernels.cn_step_multi(a, prop.v0, prop.shape, fvals[m], prop.grid.dx, g, b, prop._cp, rinv, dp2)
        elif source is not None:
            src = -1j * dt / HBAR * np.asarray(source(mids[m]), dtype=np.complex128)
            _kernels.cn_step_general(a, prop.v0 + fvals[m] * prop.shape, src, prop.grid.dx, g, b,
                                     prop._cp, prop._dp)
        else:
            _kernels.cn_step(a, prop.v0, prop.shape, fvals[m], zero if base is None else base,
                             0.0 if scoefs is None else scoefs[m], prop.grid.dx, g, b, prop._cp, prop._dp)
        for obs in observers:
            if backward:
                obs(m, mids[m], b, a)
            else:
                obs(m, mids[m], a, b)
        a, b = b, a
        if count % check_every == 0:
            _check_finite(a[:: max(1, a.shape[0] // 64)], "propagation")
    _check_finite(a, "propagation")
    return a


def propagate(state: WaveField, potential: PotentialProfile, t1: float, dt: float,
              observers: Sequence[Observer] = (), waveform: Waveform | None = None,
              variant="full") -> WaveField:
    """Homogeneous propagation from ``state.t`` to ``t1`` (dt shrunk to land on t1)."""
    axis = TimeAxis.covering(state.t, t1, dt)
    if axis.n_steps == 0:
        return state.copy()
    prop = CnPropagator(state.grid, _with_waveform(potential, waveform), variant)
    psi = _march(prop, state.psi, axis, observers)
    return WaveField(state.grid, psi, axis.t1)


def backward_propagate(final_state: WaveField, potential: PotentialProfile, t: float, dt: float,
                       observers: Sequence[Observer] = (), waveform: Waveform | None = None,
                       variant="full") -> WaveField:
    """Adjoint evolution U(t_final, t)^dagger applied to ``final_state`` (t <= t_final).

    ``final_state.psi`` may be 2-D (grid points x columns); all columns share
    one factorisation per step.
    """
    axis = TimeAxis.covering(t, final_state.t, dt)
    if axis.n_steps == 0:
        return final_state.copy()
    prop = CnPropagator(final_state.grid, _with_waveform(potential, waveform), variant)
    psi = _march(prop, final_state.psi, axis, observers, backward=True)
    return WaveField(final_state.grid, psi, axis.t0)


class StationarySource:
    """S(t) = mask * V_I(x, t) * Psi0 * phase(t) with the scheme-consistent phase.

    With c = (1 - i dt E0/2)/(1 + i dt E0/2) the homogeneous scheme advances
    Psi0 by exactly c per step; the matching midpoint phase is (1 + c)/2 c^m,
    which makes the scattered-wave split exact.
    """

    def __init__(self, psi0: np.ndarray, energy: float, mask=None):
        self.psi0 = np.asarray(psi0, dtype=np.complex128)
        self.energy = float(energy)
        self.mask = None if mask is None else np.asarray(mask, dtype=float)

    def cn_factor(self, dt) -> complex:
        a = 0.5j * dt * self.energy / HBAR
        return (1 - a) / (1 + a)

    def phases(self, axis: TimeAxis) -> np.ndarray:
        c = self.cn_factor(axis.dt)
        return 0.5 * (1 + c) * c ** np.arange(axis.n_steps)

    def base(self, prop: CnPropagator) -> np.ndarray:
        b = prop.shape * self.psi0
        if self.mask is not None:
            b = b * self.mask
        return np.ascontiguousarray(b, dtype=np.complex128)

    def scale(self, factor: float) -> "StationarySource":
        return StationarySource(self.psi0 * factor, self.energy, self.mask)


def propagate_with_source(source, potential: PotentialProfile, t0: float, t1: float, dt: float,
                          grid: SpatialGrid, variant="full", observers: Sequence[Observer] = (),
                          waveform: Waveform | None = None) -> WaveField:
    """Solve i dPhi/dt = H Phi + S(t) from Phi(t0) = 0.

    ``source`` is a :class:`StationarySource` (fast path) or any callable
    returning the source vector at a time.
    """
    axis = TimeAxis.covering(t0, t1, dt)
    prop = CnPropagator(grid, _with_waveform(potential, waveform), variant)
    zero = np.zeros(grid.n_points, dtype=np.complex128)
    if axis.n_steps == 0:
        return WaveField(grid, zero, t0)
    if isinstance(source, StationarySource):
        scoefs = -1j * axis.dt / HBAR * source.phases(axis) * prop.fields(axis.midpoints)
        psi = _march(prop, zero, axis, observers, base=source.base(prop), scoefs=scoefs)
    else:
        psi = _march(prop, zero, axis, observers, source=source)
    return WaveField(grid, psi, axis.t1)


# ---------------------------------------------------------------- stationary state


@dataclass(frozen=True)
class StationaryState:
    """Discrete scattering state incident from the tip, unit incoming amplitude.

    ``energy`` may differ from the requested one by less than half a tip-box
    level spacing: it is tuned so that the state has a node at the left wall.
    """

    grid: SpatialGrid
    energy: float
    psi: np.ndarray
    R: complex
    T: complex
    k_tip: float
    k_sample: float
    requested_energy: float

    @property
    def transmission(self) -> float:
        dx = self.grid.dx
        return float(math.sin(self.k_sample * dx) * abs(self.T) ** 2 / math.sin(self.k_tip * dx))

    def field(self, t=0.0) -> WaveField:
        return WaveField(self.grid, self.psi.copy(), t)


def discrete_wavenumber(kinetic, dx):
    """k with (1 - cos(k dx))/dx^2 = kinetic, the three-point dispersion."""
    c = 1.0 - np.asarray(kinetic, dtype=float) * dx * dx
    if np.any(c <= -1.0) or np.any(c >= 1.0):
        raise DomainError("energy outside the propagating band of the grid")
    return np.arccos(c) / dx


def _solve_discrete(x, v, energy, dx, i0):
    k_right = float(discrete_wavenumber(energy - v[-1], dx))
    psi, ghost = _kernels.stationary_recurrence(v, energy, dx, k_right, x)
    k1 = float(discrete_wavenumber(energy - v[i0 - 1], dx))
    xa, xb = x[i0 - 2], x[i0 - 1]
    m = np.array([[np.exp(1j * k1 * xa), np.exp(-1j * k1 * xa)],
                  [np.exp(1j * k1 * xb), np.exp(-1j * k1 * xb)]])
    a, b = np.linalg.solve(m, psi[[i0 - 2, i0 - 1]])
    return psi, ghost, a, b, k1, k_right


def discrete_initial_state(grid: SpatialGrid, potential: PotentialProfile, e0: float,
                           match_wall=True) -> StationaryState:
    x = grid.x
    v = np.ascontiguousarray(potential.v0(x), dtype=float)
    i0 = grid.n_left
    if not (v[0] < e0 < 0.0 and e0 > v[-1]):
        raise DomainError(f"E0={e0!r} outside the tip band below the vacuum level")
    dx = grid.dx
    x_ghost = x[0] - dx

    def wall_phase(e):
        _, _, a, b, k1, _ = _solve_discrete(x, v, e, dx, i0)
        r = b / a
        return float(np.angle(-r * np.exp(-2j * k1 * x_ghost)))

    energy = e0
    if match_wall:
        k1 = float(discrete_wavenumber(e0 - v[0], dx))
        spacing = HBAR**2 * k1 * math.pi / (MASS * (-x_ghost))
        es = e0 + spacing * np.linspace(-0.75, 0.75, 25)
        fs = np.array([wall_phase(e) for e in es])
        roots = []
        for i in range(es.size - 1):
            if fs[i] == 0.0:
                roots.append(es[i])
            elif fs[i] * fs[i + 1] < 0 and abs(fs[i]) < 1.5 and abs(fs[i + 1]) < 1.5:
                roots.append(brentq(wall_phase, es[i], es[i + 1], xtol=1e-15, rtol=1e-15))
        if not roots:
            raise NumericError("could not tune E0 to a wall node", {"e0": e0})
        energy = min(roots, key=lambda e: abs(e - e0))
    psi, ghost, a, b, k1, k3 = _solve_discrete(x, v, energy, dx, i0)
    return StationaryState(grid, energy, psi / a, complex(b / a), complex(1.0 / a), k1, k3, e0)


# ---------------------------------------------------------------- currents


def local_current(state: WaveField, x: float) -> float:
    """j = (hbar/m) Im(psi* dpsi/dx), central difference at an interior grid point."""
    i = state.grid.index(x)
    if i == 0 or i == state.grid.n_points - 1:
        raise DomainError("local current needs an interior grid point")
    p = state.psi
    dpsi = (p[i + 1] - p[i - 1]) / (2 * state.grid.dx)
    return float(HBAR / MASS * np.imag(np.conj(p[i]) * dpsi))


def bond_current(a, b, dx):
    """Current on the bond between neighbouring samples a (left) and b (right).

    With time-midpoint averages this is the flux that makes the discrete
    continuity equation of the Crank-Nicolson scheme exact.
    """
    return HBAR / MASS * np.imag(np.conj(a) * b) / dx


@dataclass
class CurrentMap:
    """j(x, t) on a coarsened grid plus full-resolution bond currents at x = 0 and x = d."""

    times: np.ndarray
    x: np.ndarray
    j: np.ndarray
    bond_times: np.ndarray
    j_tip: np.ndarray
    j_sample: np.ndarray
    d: float
    dt: float
    gap_probability: tuple[float, float] = (0.0, 0.0)
    transmitted: float = 0.0

    def series(self, x: float):
        """(t, j) at x: the bond series for x in {0, d}, otherwise the nearest stored column."""
        if abs(x) < 1e-9:
            return self.bond_times, self.j_tip
        if abs(x - self.d) < 1e-9:
            return self.bond_times, self.j_sample
        if self.x.size == 0:
            raise DomainError("current map stores no spatial columns")
        i = int(np.argmin(np.abs(self.x - x)))
        return self.times, self.j[:, i]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_fs", "x_nm", "j_atomic"])
        for it, t in enumerate(self.times):
            for ix, xv in enumerate(self.x):
                w.writerow([f"{t / FS:.8g}", f"{xv / NM:.8g}", f"{self.j[it, ix]:.10e}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def burst_duration(current: CurrentMap, x: float, noise_factor=10.0) -> float:
    """FWHM of the laser-driven |j(x, t)| around its global maximum.

    The steady tunnelling current of the Fermi-level state is removed first;
    the window is mostly field-free, so its median is that baseline.
    """
    t, j = current.series(x)
    j = np.asarray(j, dtype=float)
    a = np.abs(j - np.median(j))
    return fwhm(t, a, noise_factor)


def fwhm(t, a, noise_factor=10.0) -> float:
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    if a.size < 3:
        raise DetectionError("series too short")
    i = int(np.argmax(a))
    peak = a[i]
    floor = float(np.median(a))
    if not peak > noise_factor * floor or peak == 0:
        raise DetectionError("no burst above the noise floor", {"peak": float(peak), "floor": floor})
    half = 0.5 * peak
    lo = i
    while lo > 0 and a[lo] > half:
        lo -= 1
    hi = i
    while hi < a.size - 1 and a[hi] > half:
        hi += 1
    if a[lo] > half or a[hi] > half:
        raise DetectionError("burst not resolved inside the time window")
    tl = t[lo] + (half - a[lo]) * (t[lo + 1] - t[lo]) / (a[lo + 1] - a[lo])
    th = t[hi - 1] + (half - a[hi - 1]) * (t[hi] - t[hi - 1]) / (a[hi] - a[hi - 1])
    return float(th - tl)


# ---------------------------------------------------------------- projection


def projection_window(grid: SpatialGrid, d: float, flat=0.55, end=0.75) -> np.ndarray:
    """1 on [d, d + flat*L], cos^2 taper to zero at d + end*L, with L = x_max - d."""
    x = grid.x
    span = grid.x_max - d
    xa, xb = d + flat * span, d + end * span
    w = np.zeros_like(x)
    w[(x > d) & (x <= xa)] = 1.0
    sel = (x > xa) & (x < xb)
    w[sel] = np.cos(0.5 * np.pi * (x[sel] - xa) / (xb - xa)) ** 2
    return w


def _far_taper(grid: SpatialGrid, d: float) -> np.ndarray:
    """Weight that is 1 up to 80% of the sample side and falls smoothly to 0 at 90%."""
    x = grid.x
    span = grid.x_max - d
    xa, xb = d + 0.8 * span, d + 0.9 * span
    w = np.ones_like(x)
    sel = (x > xa) & (x < xb)
    w[sel] = np.cos(0.5 * np.pi * (x[sel] - xa) / (xb - xa)) ** 2
    w[x >= xb] = 0.0
    return w


def sample_wavenumbers(e_grid, floor, dx) -> np.ndarray:
    e_grid = np.asarray(e_grid, dtype=float)
    if np.any(e_grid <= floor):
        raise DomainError("energy grid reaches below the sample band floor")
    return discrete_wavenumber(e_grid - floor, dx)


def sample_final_states(grid: SpatialGrid, d: float, e_grid, floor) -> tuple[np.ndarray, np.ndarray]:
    """Windowed outgoing plane waves on the sample side, columns per energy, and their k."""
    k = sample_wavenumbers(e_grid, floor, grid.dx)
    w = projection_window(grid, d)
    return w[:, None] * np.exp(1j * np.outer(grid.x, k)), k


def spectral_density(amplitudes, k, dx) -> np.ndarray:
    """|M|^2 / (2 pi v) with the grid's group velocity v = sin(k dx)/dx."""
    v = HBAR / MASS * np.sin(k * dx) / dx
    return np.abs(amplitudes) ** 2 / (2 * np.pi * HBAR * v)


def project_spectrum(final_state: WaveField, j: JunctionConfig, e_grid, reference: WaveField | None = None,
                     potential: PotentialProfile | None = None, method="tdse") -> Spectrum:
    """Project the sample part of the laser-induced wave on outgoing sample eigenstates.

    ``reference`` (the field-free evolution of the initial state) is subtracted
    first when ``final_state`` is a full wave function.
    """
    grid = final_state.grid
    phi = final_state.psi if reference is None else final_state.psi - reference.psi
    floor = float(potential.v0(grid.x_max)) if potential is not None else j.sample_floor
    fe, k = sample_final_states(grid, j.d, e_grid, floor)
    amps = grid.dx * (fe.conj().T @ phi)
    return Spectrum(np.asarray(e_grid, dtype=float), spectral_density(amps, k, grid.dx), method,
                    meta={"amplitudes": amps})


# ---------------------------------------------------------------- full laser run


class BondRecorder:
    """Observer keeping time-midpoint averages of the amplitudes at given indices."""

    def __init__(self, indices, n_steps, columns=None):
        self.indices = np.asarray(indices, dtype=int)
        shape = (n_steps, self.indices.size) + (() if columns is None else (columns,))
        self.values = np.zeros(shape, dtype=np.complex128)

    def __call__(self, m, t, psi_a, psi_b):
        self.values[m] = 0.5 * (psi_a[self.indices] + psi_b[self.indices])


class SnapshotRecorder:
    def __init__(self, sl: slice, stride: int):
        self.sl, self.stride = sl, stride
        self.steps, self.frames = [], []

    def __call__(self, m, t, psi_a, psi_b):
        if (m + 1) % self.stride == 0:
            self.steps.append(m + 1)
            self.frames.append(psi_b[self.sl].copy())


@dataclass
class LaserRun:
    """Outcome of one scattered-wave run (laser-induced wave Phi plus bookkeeping)."""

    grid: SpatialGrid
    axis: TimeAxis
    potential: PotentialProfile
    initial: StationaryState
    phi: WaveField
    variant: str
    bond_indices: np.ndarray
    bonds: np.ndarray
    snapshots: tuple = ()
    snapshot_slice: slice = slice(0, 0)
    diagnostics: dict = field(default_factory=dict)

    @property
    def cn_factor(self) -> complex:
        return StationarySource(self.initial.psi, self.initial.energy).cn_factor(self.axis.dt)

    def full_state(self) -> WaveField:
        c = self.cn_factor
        return WaveField(self.grid, c ** self.axis.n_steps * self.initial.psi + self.phi.psi, self.axis.t1)

    def reference(self) -> WaveField:
        return WaveField(self.grid, self.cn_factor ** self.axis.n_steps * self.initial.psi, self.axis.t1)

    def full_bonds(self) -> np.ndarray:
        """Time-midpoint full-state amplitudes at the bond indices, per step."""
        c = self.cn_factor
        n = np.arange(self.axis.n_steps)
        ph = 0.5 * (1 + c) * c**n
        return ph[:, None] * self.initial.psi[self.bond_indices][None, :] + self.bonds

    def current_map(self) -> CurrentMap:
        dx = self.grid.dx
        fb = self.full_bonds()
        j_tip = bond_current(fb[:, 0], fb[:, 1], dx)
        j_smp = bond_current(fb[:, 2], fb[:, 3], dx)
        times = np.array([self.axis.t0 + s * self.axis.dt for s, _ in self.snapshots])
        x = self.grid.x[self.snapshot_slice]
        if self.snapshots:
            c = self.cn_factor
            p0 = self.initial.psi[self.snapshot_slice]
            frames = np.array([c**s * p0 + f for s, f in self.snapshots])
            dpsi = np.zeros_like(frames)
            dpsi[:, 1:-1] = (frames[:, 2:] - frames[:, :-2]) / (2 * dx)
            jmap = HBAR / MASS * np.imag(np.conj(frames) * dpsi)
            jmap[:, [0, -1]] = np.nan
            x, jmap = x[1:-1], jmap[:, 1:-1]
        else:
            jmap = np.zeros((0, 0))
        return CurrentMap(times, x, jmap, self.axis.midpoints, j_tip, j_smp, self.potential.d, self.axis.dt,
                          self.diagnostics.get("gap_probability", (0.0, 0.0)),
                          self.diagnostics.get("transmitted", 0.0))

    def boundary_transmission(self) -> float:
        """Laser-induced probability that crossed x = d, from the time-integrated bond current.

        Needs no final-state projection, so the span only has to keep wall
        reflections from returning to x = d inside the window.
        """
        jd = bond_current(self.bonds[:, 2], self.bonds[:, 3], self.grid.dx)
        return float(np.sum(jd) * self.axis.dt)

    def spectrum(self, e_grid, method="tdse") -> Spectrum:
        j = self.potential.junction
        return project_spectrum(self.phi, j, e_grid, potential=self.potential, method=method)


def laser_potential(j: JunctionConfig, pulse: PulseConfig, sign=1) -> PotentialProfile:
    return build_potential(j, pulse, sign=sign)


def run_laser(j: JunctionConfig, pulse: PulseConfig, grid_cfg: GridConfig | None = None, sign=1,
              e0: float | None = None, variant="full", source_rows="all", map_stride=0,
              map_range: tuple[float, float] | None = None, waveform: Waveform | None = None,
              extra_observers: Sequence[Observer] = ()) -> LaserRun:
    """Propagate the laser-induced wave of the Fermi-level state through the pulse window.

    ``source_rows`` selects where V_I drives the wave: ``"all"`` (direct TDSE)
    or ``"gap"`` (the gap-sourced wave of the flux form, normally with
    ``variant="is"``).  ``map_stride`` > 0 keeps coarse snapshots for a
    current map over ``map_range``.
    """
    grid_cfg = grid_cfg or GridConfig()
    grid = SpatialGrid.for_junction(j, grid_cfg)
    potential = build_potential(j, pulse, sign=sign, waveform=waveform)
    e0 = j.fermi_level if e0 is None else e0
    initial = discrete_initial_state(grid, potential, e0)
    t0, t1 = pulse.t_window
    if grid_cfg.t_span is not None:
        t0, t1 = -0.5 * grid_cfg.t_span, 0.5 * grid_cfg.t_span
    axis = TimeAxis.covering(t0, t1, grid_cfg.dt)
    x = grid.x
    i0, i_d = grid.index(0.0), grid.index(j.d)
    if source_rows == "all":
        # the static outgoing wave is cut by the far wall; drive it only away from the wall
        mask = np.where(x > j.d, _far_taper(grid, j.d), 1.0)
    elif source_rows == "gap":
        mask = ((x >= 0) & (x <= j.d)).astype(float)
    else:
        raise DomainError(f"unknown source region {source_rows!r}")
    src = StationarySource(initial.psi, initial.energy, mask)
    bond_idx = np.array([i0 - 1, i0, i_d, i_d + 1])
    rec = BondRecorder(bond_idx, axis.n_steps)
    observers = [rec, *extra_observers]
    snap = None
    sl = slice(0, 0)
    if map_stride > 0:
        lo, hi = map_range or (-2.0 * NM, j.d + 3.0 * NM)
        ia = max(1, grid.index(round(lo / grid.dx) * grid.dx))
        ib = min(grid.n_points - 1, grid.index(round(hi / grid.dx) * grid.dx) + 1)
        sl = slice(ia, ib)
        snap = SnapshotRecorder(sl, map_stride)
        observers.append(snap)
    phi = propagate_with_source(src, potential, t0, axis.t1, axis.dt, grid, variant, observers)
    run = LaserRun(grid, axis, potential, initial, phi, variant, bond_idx, rec.values,
                   tuple(zip(snap.steps, snap.frames)) if snap else (), sl)
    gap = (x >= 0) & (x <= j.d)
    full0 = initial.psi
    fullT = run.full_state().psi
    run.diagnostics.update(
        e0_used=initial.energy,
        e0_shift=initial.energy - e0,
        edge_ratio=phi.edge_ratio(),
        transmitted=phi.probability(x > j.d),
        gap_probability=(float(grid.dx * np.sum(np.abs(full0[gap]) ** 2)),
                         float(grid.dx * np.sum(np.abs(fullT[gap]) ** 2))),
        n_steps=axis.n_steps,
        dt=axis.dt,
    )
    return run
