"""Tunneling spectra: container, normalisation, CSV I/O and cutoff detection."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DetectionError, InputError
from .units import EV


@dataclass(frozen=True)
class Spectrum:
    """Probability density per unit energy on a strictly increasing grid (atomic units).

    ``values`` integrate (sum times spacing) to a probability.
    """

    e_grid: np.ndarray
    values: np.ndarray
    method: str = "tdse"
    normalization: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        e = np.asarray(self.e_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or e.shape != v.shape:
            raise InputError("energy grid and values must be 1-D arrays of equal length")
        if e.size > 1 and not np.all(np.diff(e) > 0):
            raise InputError("energy grid must be strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InputError("spectrum values must be finite and non-negative")
        object.__setattr__(self, "e_grid", e)
        object.__setattr__(self, "values", v)

    @property
    def spacing(self) -> np.ndarray:
        return np.gradient(self.e_grid) if self.e_grid.size > 1 else np.ones(1)

    def total(self, e_min=-np.inf, e_max=np.inf) -> float:
        sel = (self.e_grid >= e_min) & (self.e_grid <= e_max)
        return float(np.sum(self.values[sel] * self.spacing[sel]))

    def normalized(self) -> "Spectrum":
        """Scale to unit integrated probability; the factor is kept in ``normalization``."""
        tot = self.total()
        if tot <= 0:
            return self
        return replace(self, values=self.values / tot, normalization=self.normalization * tot)

    def log10(self, floor=1e-300) -> np.ndarray:
        return np.log10(np.maximum(self.values, floor))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["energy_eV", "probability_density"])
        for e, v in zip(self.e_grid, self.values):
            w.writerow([f"{e / EV:.10g}", f"{v * EV:.10e}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path, method="tdse") -> "Spectrum":
        rows = list(csv.DictReader(Path(path).read_text().splitlines()))
        if not rows or "energy_eV" not in rows[0]:
            raise InputError(f"{path}: not a spectrum CSV")
        e = np.array([float(r["energy_eV"]) for r in rows]) * EV
        v = np.array([float(r["probability_density"]) for r in rows]) / EV
        return cls(e, v, method)


def relative_l2(a: Spectrum, b: Spectrum, normalize=True) -> float:
    """Relative L2 distance of two spectra on the same grid, optionally after unit normalisation."""
    if a.e_grid.shape != b.e_grid.shape or not np.allclose(a.e_grid, b.e_grid, rtol=1e-12, atol=0):
        raise InputError("spectra live on different energy grids")
    x, y = (a.normalized(), b.normalized()) if normalize else (a, b)
    den = np.linalg.norm(y.values)
    if den == 0:
        return 0.0 if np.linalg.norm(x.values) == 0 else np.inf
    return float(np.linalg.norm(x.values - y.values) / den)


def knee_energy(spec: Spectrum, e_min=None, e_max=None, floor_decades=12.0) -> float:
    """Cutoff as the break point of a continuous two-segment fit to log10 of the spectrum.

    The plateau and the post-cutoff fall-off are each modelled by a straight line;
    the break point is chosen by least squares over all grid positions and then
    refined between neighbours by a 1-D bounded search.
    """
    e, y = spec.e_grid, spec.log10()
    sel = np.ones_like(e, dtype=bool)
    if e_min is not None:
        sel &= e >= e_min
    if e_max is not None:
        sel &= e <= e_max
    e, y = e[sel], y[sel]
    if e.size < 6:
        raise DetectionError("too few energy points to locate a cutoff")
    top = y.max()
    if not np.isfinite(top):
        raise DetectionError("empty spectrum")
    y = np.maximum(y, top - floor_decades)

    def sse(eb):
        basis = np.column_stack([np.ones_like(e), e - eb, np.maximum(e - eb, 0.0)])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        r = y - basis @ coef
        return float(r @ r), coef

    cand = e[2:-2]
    errs = np.array([sse(c)[0] for c in cand])
    i = int(np.argmin(errs))
    lo, hi = cand[max(i - 1, 0)], cand[min(i + 1, cand.size - 1)]
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda eb: sse(eb)[0], bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-6})
    eb = float(res.x)
    coef = sse(eb)[1]
    if not coef[2] < 0:
        raise DetectionError("no fall-off found after the plateau", {"slopes": coef[1:].tolist()})
    return eb


def log_correlation(a: Spectrum, b: Spectrum, e_min, e_max, floor=1e-300) -> float:
    """Pearson correlation of log10 densities over [e_min, e_max] (shape agreement, scale-free)."""
    if a.e_grid.shape != b.e_grid.shape or not np.allclose(a.e_grid, b.e_grid, rtol=1e-12, atol=0):
        raise InputError("spectra live on different energy grids")
    sel = (a.e_grid >= e_min) & (a.e_grid <= e_max)
    if sel.sum() < 3:
        raise InputError("fewer than three energies in the correlation window")
    return float(np.corrcoef(a.log10(floor)[sel], b.log10(floor)[sel])[0, 1])
