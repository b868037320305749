"""Laser waveforms: vector potential and field for the Gaussian pulse and the CW + static form.

Conventions: E(t) = -dA/dt.  The Gaussian pulse is
``A(t) = sign * F/omega * exp(-4 ln2 (t/fwhm)^2) * sin(omega t + cep)``;
the CW form is ``A(t) = F0 t + sign * F/omega * sin(omega t + cep)`` so that
``E(t) = -F0 - sign * F cos(omega t + cep)``.  Both accept complex ``t``
(entire functions), which the saddle-point solver relies on.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .units import PulseConfig


class WaveKind(str, enum.Enum):
    GAUSSIAN = "gaussian_pulse"
    CW = "cw_plus_static"


@dataclass(frozen=True)
class Waveform:
    kind: WaveKind
    peak_field: float
    omega: float
    fwhm: float = math.inf
    cep: float = 0.0
    static_field: float = 0.0
    sign: int = 1
    t_window: tuple[float, float] = (-math.inf, math.inf)

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "kind", WaveKind(self.kind))

    @classmethod
    def gaussian(cls, pulse: PulseConfig, sign=1, static_field=0.0) -> "Waveform":
        return cls(WaveKind.GAUSSIAN, pulse.peak_field, pulse.omega, pulse.fwhm, pulse.cep,
                   static_field, sign, pulse.t_window)

    @classmethod
    def cw(cls, peak_field, omega, static_field=0.0, cep=0.0, sign=1) -> "Waveform":
        return cls(WaveKind.CW, peak_field, omega, math.inf, cep, static_field, sign)

    def flipped(self) -> "Waveform":
        return replace(self, sign=-self.sign)

    def laser_only(self) -> "Waveform":
        return replace(self, static_field=0.0)

    def scaled(self, factor: float) -> "Waveform":
        return replace(self, peak_field=self.peak_field * factor,
                       static_field=self.static_field * factor)

    @property
    def _a(self):
        return 4.0 * math.log(2.0) / self.fwhm**2

    def envelope(self, t):
        if self.kind is WaveKind.CW:
            return np.ones_like(np.asarray(t, dtype=complex if np.iscomplexobj(t) else float))
        return np.exp(-self._a * np.asarray(t) ** 2)

    def vector_potential(self, t):
        t = np.asarray(t)
        phase = self.omega * t + self.cep
        amp = self.sign * self.peak_field / self.omega
        if self.kind is WaveKind.CW:
            return self.static_field * t + amp * np.sin(phase)
        return self.static_field * t + amp * np.exp(-self._a * t * t) * np.sin(phase)

    def efield(self, t):
        t = np.asarray(t)
        phase = self.omega * t + self.cep
        if self.kind is WaveKind.CW:
            return -self.static_field - self.sign * self.peak_field * np.cos(phase)
        g = np.exp(-self._a * t * t)
        # exact derivative of the enveloped carrier, envelope term kept
        return -self.static_field - self.sign * self.peak_field * g * (
            np.cos(phase) - (2.0 * self._a * t / self.omega) * np.sin(phase))

    def efield_derivative(self, t):
        """dE/dt, used by the saddle-point Jacobian."""
        t = np.asarray(t)
        phase = self.omega * t + self.cep
        F, w = self.peak_field, self.omega
        if self.kind is WaveKind.CW:
            return self.sign * F * w * np.sin(phase)
        a = self._a
        g = np.exp(-a * t * t)
        # d/dt [g (cos - (2 a t / w) sin)]
        inner = (-w * np.sin(phase) - (2 * a / w) * np.sin(phase) - 2 * a * t * np.cos(phase)
                 - 2 * a * t * (np.cos(phase) - (2 * a * t / w) * np.sin(phase)))
        return -self.sign * F * g * inner

    # aliases read better in formulas
    A = vector_potential
    E = efield


def vector_potential(w: Waveform, t):
    return w.vector_potential(t)


def efield(w: Waveform, t):
    return w.efield(t)
