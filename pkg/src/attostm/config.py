"""TOML run configuration: numerical settings and a loader with line-anchored errors."""
from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .units import AS, EV, FS, NM, JunctionConfig, PulseConfig

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


@dataclass(frozen=True)
class GridConfig:
    """TDSE discretisation in atomic units. ``t_span`` None means the pulse window."""

    dx: float = 0.01 * NM
    dt: float = 2.2 * AS
    x_span: float = 300.0 * NM
    t_span: float | None = None

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0 and self.x_span > 0):
            raise ConfigError("grid steps and span must be positive")
        if self.t_span is not None and not self.t_span > 0:
            raise ConfigError("t_span must be positive")

    def refined(self, factor=2.0) -> "GridConfig":
        return GridConfig(self.dx / factor, self.dt / factor, self.x_span, self.t_span)


@dataclass(frozen=True)
class EnergyGrid:
    e_min: float = -4.5 * EV
    e_max: float = 45.0 * EV
    n_points: int = 496

    def __post_init__(self):
        if not self.n_points >= 2:
            raise ConfigError("spectrum n_points must be at least 2")
        if not self.e_max > self.e_min:
            raise ConfigError("spectrum e_max must exceed e_min")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.e_min, self.e_max, self.n_points)


@dataclass(frozen=True)
class SfaQuadrature:
    tau_min: float = 1.0 * AS
    dt_quad: float = 10.0 * AS
    u_switch: float | None = None   # tau where the sqrt substitution hands over to uniform steps
    t_margin: float = 0.0

    def __post_init__(self):
        if not (self.tau_min > 0 and self.dt_quad > 0):
            raise ConfigError("sfa tau_min and dt_quad must be positive")

    def refined(self, factor=2.0) -> "SfaQuadrature":
        return SfaQuadrature(self.tau_min / factor, self.dt_quad / factor, self.u_switch, self.t_margin)


@dataclass(frozen=True)
class RunConfig:
    junction: JunctionConfig
    pulse: PulseConfig
    grid: GridConfig = field(default_factory=GridConfig)
    energy: EnergyGrid = field(default_factory=EnergyGrid)
    sfa: SfaQuadrature = field(default_factory=SfaQuadrature)
    raw: dict = field(default_factory=dict, compare=False)


_SCHEMA = {
    "junction": {"d_nm": float, "fermi_tip_eV": float, "fermi_sample_eV": float, "work_tip_eV": float,
                 "work_sample_eV": float, "bias_V": float, "image_potential": bool},
    "pulse": {"field_Vnm": float, "static_field_Vnm": float, "wavelength_nm": float, "fwhm_fs": float,
              "cep_rad": float, "window_fwhm": float},
    "grid": {"dx_nm": float, "dt_as": float, "x_span_nm": float, "t_span_fs": float},
    "spectrum": {"e_min_eV": float, "e_max_eV": float, "n_points": int},
    "sfa": {"tau_min_as": float, "dt_quad_as": float},
}
_REQUIRED = {"junction": ("d_nm",), "pulse": ("field_Vnm",)}
DEFAULTS = {
    "junction": {"fermi_tip_eV": 5.0, "fermi_sample_eV": 5.0, "work_tip_eV": 5.0, "work_sample_eV": 5.0,
                 "bias_V": 0.0, "image_potential": False},
    "pulse": {"static_field_Vnm": 0.0, "wavelength_nm": 830.0, "fwhm_fs": 6.0, "cep_rad": 0.0,
              "window_fwhm": 4.0},
    "grid": {"dx_nm": 0.01, "dt_as": 2.2, "x_span_nm": 300.0},
    "spectrum": {"e_min_eV": -4.5, "e_max_eV": 45.0, "n_points": 496},
    "sfa": {"tau_min_as": 1.0, "dt_quad_as": 10.0},
}


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    sec_line, current = None, None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[\s*([A-Za-z0-9_.-]+)\s*\]", s)
        if m:
            current = m.group(1)
            if current == section and sec_line is None:
                sec_line = no
            continue
        if key is not None and current == section and re.match(rf"^{re.escape(key)}\s*=", s):
            return no
    return sec_line


def _coerce(value, kind, where, line):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false", line)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer", line)
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number", line)
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{where} must be finite", line)
    return v


def parse_config(text: str, overrides: dict | None = None, extra_sections=()) -> RunConfig:
    """Parse TOML text into a validated :class:`RunConfig`.

    ``overrides`` maps ``section.key`` to values applied after parsing (used by scans).
    Tables named in ``extra_sections`` are skipped (recipe files carry their own).
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed TOML: {exc}", int(m.group(1)) if m else None) from None
    merged = {}
    for section, keys in _SCHEMA.items():
        merged[section] = dict(DEFAULTS.get(section, {}))
        given = data.get(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"[{section}] must be a table", _line_of(text, section))
        for key, value in given.items():
            if key not in keys:
                raise ConfigError(f"unknown key {section}.{key}", _line_of(text, section, key))
            merged[section][key] = _coerce(value, keys[key], f"{section}.{key}", _line_of(text, section, key))
    for section in data:
        if section not in _SCHEMA and section not in extra_sections:
            raise ConfigError(f"unknown section [{section}]", _line_of(text, section))
    for dotted, value in (overrides or {}).items():
        section, key = dotted.split(".", 1)
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown override {dotted}")
        merged[section][key] = _coerce(value, _SCHEMA[section][key], dotted, None)
    for section, keys in _REQUIRED.items():
        for key in keys:
            if key not in merged[section]:
                raise ConfigError(f"missing required key {section}.{key}", _line_of(text, section))

    def build(section, fn):
        try:
            return fn(merged[section])
        except ConfigError as exc:
            if exc.line is None:
                raise ConfigError(str(exc), _line_of(text, section), exc.diagnostics) from None
            raise

    junction = build("junction", lambda s: JunctionConfig.from_user(
        s["d_nm"], s["fermi_tip_eV"], s["fermi_sample_eV"], s["work_tip_eV"], s["work_sample_eV"],
        s["bias_V"], s["image_potential"]))
    pulse = build("pulse", lambda s: PulseConfig.from_user(
        s["field_Vnm"], s["wavelength_nm"], s["fwhm_fs"], s["cep_rad"], s["static_field_Vnm"],
        s["window_fwhm"]))
    grid = build("grid", lambda s: GridConfig(
        s["dx_nm"] * NM, s["dt_as"] * AS, s["x_span_nm"] * NM,
        s["t_span_fs"] * FS if "t_span_fs" in s else None))
    energy = build("spectrum", lambda s: EnergyGrid(s["e_min_eV"] * EV, s["e_max_eV"] * EV, s["n_points"]))
    sfa = build("sfa", lambda s: SfaQuadrature(s["tau_min_as"] * AS, s["dt_quad_as"] * AS))
    return RunConfig(junction, pulse, grid, energy, sfa, raw=merged)


def load_config(path, overrides: dict | None = None, extra_sections=()) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from None
    return parse_config(text, overrides, extra_sections)


def dump_config(raw: dict) -> str:
    """Canonical TOML text for a merged section dict (sorted keys, repr floats)."""
    out = []
    for section in _SCHEMA:
        if section not in raw:
            continue
        out.append(f"[{section}]")
        for key in sorted(raw[section]):
            v = raw[section][key]
            if isinstance(v, bool):
                s = "true" if v else "false"
            elif isinstance(v, int):
                s = str(v)
            else:
                s = repr(float(v))
            out.append(f"{key} = {s}")
        out.append("")
    return "\n".join(out)
