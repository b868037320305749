"""Static and laser-coupled potentials of the tip-gap-sample junction, plus its analytic eigenstates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .pulse import Waveform
from .units import E_CHARGE, HBAR, MASS, JunctionConfig, PulseConfig


def classical_image_potential(j: JunctionConfig, floor_clip=True) -> Callable:
    """Single image pair of a point charge between two ideal planes.

    Only a hook: the solvers never install it unless the junction enables the
    image potential.  The divergence at the surfaces is clipped to the deeper well.
    """
    d = j.d
    clip = min(j.tip_floor, j.sample_floor)

    def v(x):
        x = np.asarray(x, dtype=float)
        xi = np.clip(x, 1e-12, d - 1e-12)
        val = -0.25 * E_CHARGE**2 * (1.0 / xi + 1.0 / (d - xi) - 2.0 / d)
        return np.maximum(val, clip) if floor_clip else val

    return v


@dataclass(frozen=True)
class PotentialProfile:
    """V(x, t) = V0(x) + V_I(x, t), with V_Is the well-free variant used for the gap wave.

    ``waveform`` supplies the laser field E(t) (its static part is ignored here;
    static fields live in V0 through bias, contact potential and ``extra_static_field``).
    """

    junction: JunctionConfig
    waveform: Waveform | None = None
    extra_static_field: float = 0.0
    image: Callable | None = None

    @property
    def d(self):
        return self.junction.d

    def regions(self, x):
        x = np.asarray(x, dtype=float)
        tip = (x < 0).astype(float)
        sample = (x > self.d).astype(float)
        return tip, 1.0 - tip - sample, sample

    def _static_gap(self, x):
        """Static gap potential at x (contact/bias ramp, extra static field, image)."""
        x = np.asarray(x, dtype=float)
        ramp = self.junction.static_drop * x / self.d + E_CHARGE * self.extra_static_field * x
        if self.image is not None:
            ramp = ramp + self.image(x)
        return ramp

    def well_depth(self, x):
        """V - V_Is: the metal wells, zero in the gap."""
        x = np.asarray(x, dtype=float)
        j = self.junction
        return np.where(x < 0, j.tip_floor,
                        np.where(x > self.d, -(j.fermi_sample + j.work_sample), 0.0))

    def v0(self, x):
        x = np.asarray(x, dtype=float)
        d = self.d
        gap = self._static_gap(np.clip(x, 0.0, d))
        return np.where(x < 0, self.junction.tip_floor,
                        np.where(x > d, self.junction.sample_floor + E_CHARGE * self.extra_static_field * d, gap))

    def laser_field(self, t):
        if self.waveform is None:
            return 0.0 * np.asarray(t, dtype=float)
        return self.waveform.laser_only().efield(t)

    def interaction_shape(self, x):
        """V_I(x, t) = -e E(t) * shape(x); shape is 0 | x | d."""
        x = np.asarray(x, dtype=float)
        return np.clip(x, 0.0, self.d)

    def v_int(self, x, t):
        return -E_CHARGE * self.laser_field(t) * self.interaction_shape(x)

    def v(self, x, t):
        return self.v0(x) + self.v_int(x, t)

    def v_is(self, x, t):
        return self.v(x, t) - self.well_depth(x)


def build_potential(j: JunctionConfig, pulse: PulseConfig | None = None, sign=1,
                    waveform: Waveform | None = None, image: Callable | None = None) -> PotentialProfile:
    if waveform is None and pulse is not None:
        waveform = Waveform.gaussian(pulse, sign=sign)
    extra = pulse.static_field if pulse is not None else 0.0
    if j.image_potential_enabled and image is None:
        image = classical_image_potential(j)
    if not j.image_potential_enabled:
        image = None
    return PotentialProfile(j, waveform, extra, image)


@dataclass(frozen=True)
class StaticEigenstate:
    """Scattering state incident from the tip at energy E0 (rectangular gap).

    x < 0: exp(i k1 x) + R exp(-i k1 x);  0 <= x <= d: B1 exp(-alpha x) + B2 exp(alpha x);
    x > d: T exp(i k3 x).
    """

    energy: float
    d: float
    k1: float
    k3: float
    alpha: float
    R: complex
    T: complex
    B1: complex
    B2: complex

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        tip = np.exp(1j * self.k1 * x) + self.R * np.exp(-1j * self.k1 * x)
        xg = np.clip(x, 0.0, self.d)
        a = self.alpha / HBAR
        gap = self.B1 * np.exp(-a * xg) + self.B2 * np.exp(a * xg)
        smp = self.T * np.exp(1j * self.k3 * x)
        return np.where(x < 0, tip, np.where(x > self.d, smp, gap))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        k1, k3, a = self.k1, self.k3, self.alpha / HBAR
        tip = 1j * k1 * (np.exp(1j * k1 * x) - self.R * np.exp(-1j * k1 * x))
        xg = np.clip(x, 0.0, self.d)
        gap = -a * self.B1 * np.exp(-a * xg) + a * self.B2 * np.exp(a * xg)
        smp = 1j * k3 * self.T * np.exp(1j * k3 * x)
        return np.where(x < 0, tip, np.where(x > self.d, smp, gap))

    @property
    def transmission(self) -> float:
        """Transmitted over incident probability current."""
        return self.k3 * abs(self.T) ** 2 / self.k1


def solve_initial_state(j: JunctionConfig, e0: float) -> StaticEigenstate:
    """Match the three analytic pieces at x = 0 and x = d (rectangular gap only)."""
    if not j.is_rectangular:
        raise DomainError("analytic initial state needs a rectangular gap (no bias, contact potential or image)")
    if not (j.tip_floor < e0 < 0.0 and e0 > j.sample_floor):
        raise DomainError(f"E0={e0!r} outside the tip band below the vacuum level")
    k1 = math.sqrt(2 * MASS * (e0 - j.tip_floor)) / HBAR
    k3 = math.sqrt(2 * MASS * (e0 - j.sample_floor)) / HBAR
    alpha = math.sqrt(2 * MASS * abs(e0))
    a, d = alpha / HBAR, j.d
    q = math.exp(-a * d)
    ph = np.exp(1j * k3 * d)
    # unknowns (R, B1, C2 = B2 e^{a d}, T); rescaling keeps the system well conditioned
    M = np.array([
        [-1.0, 1.0, q, 0.0],
        [1j * k1, -a, a * q, 0.0],
        [0.0, q, 1.0, -ph],
        [0.0, -a * q, a, -1j * k3 * ph],
    ], dtype=complex)
    rhs = np.array([1.0, 1j * k1, 0.0, 0.0], dtype=complex)
    R, B1, C2, T = np.linalg.solve(M, rhs)
    return StaticEigenstate(e0, d, k1, k3, alpha, complex(R), complex(T), complex(B1), complex(C2 * q))


@dataclass(frozen=True)
class SampleEigenstate:
    """Unit-amplitude outgoing plane wave exp(i k x) in the sample region.

    ``energy`` is measured from the gap vacuum level at zero bias; ``k`` is the
    sample wavenumber measured from the sample floor.
    """

    energy: float
    k: float
    floor: float
    normalization: str = "unit-amplitude-outgoing"

    @property
    def kinetic(self):
        return self.energy - self.floor

    @property
    def velocity(self):
        return HBAR * self.k / MASS

    def __call__(self, x):
        return np.exp(1j * self.k * np.asarray(x, dtype=float))


def sample_eigenstate(j: JunctionConfig, e: float) -> SampleEigenstate:
    floor = j.sample_floor
    if not e > floor:
        raise DomainError(f"E={e!r} below the sample band floor {floor!r}")
    return SampleEigenstate(e, math.sqrt(2 * MASS * (e - floor)) / HBAR, floor)
