"""Constants, unit conversion and the validated configuration records.

Everything past this module works in Hartree atomic units
(hbar = m = |e| = 1).  The electron charge is kept signed, ``E_CHARGE = -1``,
and every formula downstream uses it explicitly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from scipy import constants as _sc

from .errors import ConfigError, DomainError

HBAR = 1.0
MASS = 1.0
E_CHARGE = -1.0

HARTREE_EV = _sc.physical_constants["Hartree energy in eV"][0]
BOHR_M = _sc.physical_constants["Bohr radius"][0]
AU_TIME_S = _sc.physical_constants["atomic unit of time"][0]
AU_FIELD_V_PER_M = _sc.physical_constants["atomic unit of electric field"][0]
C_SI = _sc.c
C_AU = C_SI * AU_TIME_S / BOHR_M

NM = 1e-9 / BOHR_M          # bohr per nm
FS = 1e-15 / AU_TIME_S      # au of time per fs
AS = 1e-18 / AU_TIME_S
EV = 1.0 / HARTREE_EV
V_PER_NM = 1e9 / AU_FIELD_V_PER_M
VOLT = 1.0 / HARTREE_EV     # potential: 1 V moves |e| by 1 eV


class Unit(enum.Enum):
    # (dimension, value of one unit in atomic units)
    EV = ("energy", EV)
    HARTREE = ("energy", 1.0)
    NM = ("length", NM)
    BOHR = ("length", 1.0)
    FS = ("time", FS)
    AS = ("time", AS)
    AU_TIME = ("time", 1.0)
    V_PER_NM = ("field", V_PER_NM)
    AU_FIELD = ("field", 1.0)
    PER_S = ("angular_frequency", AU_TIME_S)
    AU_FREQUENCY = ("angular_frequency", 1.0)
    VOLT = ("potential", VOLT)
    AU_POTENTIAL = ("potential", 1.0)
    DIMENSIONLESS = ("dimensionless", 1.0)

    @property
    def dimension(self) -> str:
        return self.value[0]

    @property
    def scale(self) -> float:
        return self.value[1]

    @property
    def is_atomic(self) -> bool:
        return self.value[1] == 1.0


_ATOMIC = {
    "energy": Unit.HARTREE,
    "length": Unit.BOHR,
    "time": Unit.AU_TIME,
    "field": Unit.AU_FIELD,
    "angular_frequency": Unit.AU_FREQUENCY,
    "potential": Unit.AU_POTENTIAL,
    "dimensionless": Unit.DIMENSIONLESS,
}

_ALIASES = {
    "ev": Unit.EV, "hartree": Unit.HARTREE, "nm": Unit.NM, "bohr": Unit.BOHR,
    "fs": Unit.FS, "as": Unit.AS, "v/nm": Unit.V_PER_NM, "1/s": Unit.PER_S,
    "s^-1": Unit.PER_S, "v": Unit.VOLT, "rad": Unit.DIMENSIONLESS, "": Unit.DIMENSIONLESS,
}


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: Unit

    def __post_init__(self):
        if not isinstance(self.unit, Unit):
            unit = _ALIASES.get(str(self.unit).strip().lower())
            if unit is None:
                raise ConfigError(f"unsupported unit {self.unit!r}")
            object.__setattr__(self, "unit", unit)


def to_atomic(q: Quantity) -> Quantity:
    return Quantity(q.value * q.unit.scale, _ATOMIC[q.unit.dimension])


def from_atomic(value: float, unit) -> Quantity:
    """Express an atomic-unit ``value`` in ``unit`` (a :class:`Unit` or alias string)."""
    unit = Quantity(0.0, unit).unit
    return Quantity(value / unit.scale, unit)


def au(value: float, unit) -> float:
    """Shorthand: a user-unit number to its atomic-unit float."""
    return to_atomic(Quantity(value, unit)).value


@dataclass(frozen=True)
class JunctionConfig:
    """Tip / vacuum gap / sample sandwich, all energies and lengths in atomic units.

    ``contact_potential`` is (W_t - W_s)/e; with e < 0 a tip with the larger work
    function gives a negative Volta potential.
    """

    d: float
    fermi_tip: float
    fermi_sample: float
    work_tip: float
    work_sample: float
    bias: float = 0.0
    contact_potential: float | None = None
    image_potential_enabled: bool = False

    def __post_init__(self):
        if not self.d > 0:
            raise ConfigError("junction width d must be positive")
        if not (self.work_tip > 0 and self.work_sample > 0):
            raise ConfigError("work functions must be positive")
        if self.fermi_tip < 0 or self.fermi_sample < 0:
            raise ConfigError("Fermi energies must be non-negative")
        phi = (self.work_tip - self.work_sample) / E_CHARGE
        if self.contact_potential is None:
            object.__setattr__(self, "contact_potential", phi)
        elif not math.isclose(self.contact_potential, phi, rel_tol=1e-12, abs_tol=1e-300):
            raise ConfigError(
                f"contact_potential {self.contact_potential!r} inconsistent with work functions ({phi!r})"
            )

    @classmethod
    def from_user(cls, d_nm, fermi_tip_eV=5.0, fermi_sample_eV=5.0, work_tip_eV=5.0,
                  work_sample_eV=5.0, bias_V=0.0, image_potential=False):
        return cls(
            d=d_nm * NM,
            fermi_tip=fermi_tip_eV * EV,
            fermi_sample=fermi_sample_eV * EV,
            work_tip=work_tip_eV * EV,
            work_sample=work_sample_eV * EV,
            bias=bias_V * VOLT,
            image_potential_enabled=bool(image_potential),
        )

    @property
    def tip_floor(self) -> float:
        return -(self.fermi_tip + self.work_tip)

    @property
    def sample_floor(self) -> float:
        return -(self.fermi_sample + self.work_sample
                 + E_CHARGE * self.contact_potential + E_CHARGE * self.bias)

    @property
    def static_drop(self) -> float:
        """Potential energy of the gap at x = d relative to x = 0."""
        return -E_CHARGE * (self.contact_potential + self.bias)

    @property
    def static_field(self) -> float:
        """Static gap field F0 in the ``E(t) = -F0 - ...`` sign convention."""
        # gap potential -e*E_s*x with E_s = (phi + U)/d, and E_s = -F0
        return -(self.contact_potential + self.bias) / self.d

    @property
    def is_rectangular(self) -> bool:
        return self.contact_potential == 0.0 and self.bias == 0.0 and not self.image_potential_enabled

    @property
    def fermi_level(self) -> float:
        """Tip Fermi level relative to the vacuum level at x = 0."""
        return -self.work_tip

    def mirrored(self) -> "JunctionConfig":
        """Same junction seen from the sample: materials swapped, bias reversed."""
        return JunctionConfig(
            d=self.d,
            fermi_tip=self.fermi_sample,
            fermi_sample=self.fermi_tip,
            work_tip=self.work_sample,
            work_sample=self.work_tip,
            bias=-self.bias,
            image_potential_enabled=self.image_potential_enabled,
        )

    def with_width(self, d: float) -> "JunctionConfig":
        return replace(self, d=d)


@dataclass(frozen=True)
class PulseConfig:
    """Laser parameters in atomic units.

    ``fwhm`` multiplies the vector-potential envelope exp(-4 ln2 (t/fwhm)^2).
    The default window is four FWHM centred on the envelope peak.
    """

    peak_field: float
    omega: float
    fwhm: float
    cep: float = 0.0
    static_field: float = 0.0
    wavelength: float | None = None
    t_window: tuple[float, float] | None = field(default=None)

    def __post_init__(self):
        if self.peak_field < 0:
            raise ConfigError("peak field must be non-negative")
        if not self.omega > 0:
            raise ConfigError("angular frequency must be positive")
        if not self.fwhm > 0:
            raise ConfigError("fwhm must be positive")
        if self.wavelength is not None:
            omega = 2 * math.pi * C_AU / self.wavelength
            if not math.isclose(omega, self.omega, rel_tol=1e-12):
                raise ConfigError(f"omega {self.omega!r} inconsistent with wavelength ({omega!r})")
        if self.t_window is None:
            object.__setattr__(self, "t_window", (-2.0 * self.fwhm, 2.0 * self.fwhm))
        t0, t1 = (float(v) for v in self.t_window)
        object.__setattr__(self, "t_window", (t0, t1))
        if not t1 > t0:
            raise ConfigError("t_window must be increasing")
        span = t1 - t0
        if span < 4.0 * self.fwhm * (1 - 1e-12):
            raise ConfigError("t_window must span at least 4 x fwhm")
        if abs(t0 + t1) > 1e-9 * span:
            raise ConfigError("t_window must be centred on the envelope peak (t = 0)")

    @classmethod
    def from_user(cls, field_Vnm, wavelength_nm=830.0, fwhm_fs=6.0, cep_rad=0.0,
                  static_field_Vnm=0.0, window_fwhm=4.0):
        lam = wavelength_nm * NM
        fwhm = fwhm_fs * FS
        half = 0.5 * window_fwhm * fwhm
        return cls(
            peak_field=field_Vnm * V_PER_NM,
            omega=2 * math.pi * C_AU / lam,
            fwhm=fwhm,
            cep=cep_rad,
            static_field=static_field_Vnm * V_PER_NM,
            wavelength=lam,
            t_window=(-half, half),
        )

    def with_(self, **changes) -> "PulseConfig":
        if "fwhm" in changes and "t_window" not in changes:
            scale = (self.t_window[1] - self.t_window[0]) / self.fwhm
            half = 0.5 * scale * changes["fwhm"]
            changes["t_window"] = (-half, half)
        return replace(self, **changes)


def keldysh_gamma(pulse: PulseConfig, e0: float) -> float:
    """omega sqrt(2 m |E0|) / (|e| F), atomic units in and out."""
    if pulse.peak_field == 0:
        raise DomainError("Keldysh parameter undefined for zero field")
    return pulse.omega * math.sqrt(2 * MASS * abs(e0)) / (abs(E_CHARGE) * pulse.peak_field)
