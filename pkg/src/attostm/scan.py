"""Parameter sweeps: one independent, reproducible run per scan point, reduced in index order."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, dump_config, parse_config
from .errors import AttostmError, ConfigError
from .units import AS, EV

AXES = {
    "field": "pulse.field_Vnm",
    "width": "junction.d_nm",
    "cep": "pulse.cep_rad",
    "duration": "pulse.fwhm_fs",
    "energy": None,
}
METHODS = ("tdse", "flux", "sfa", "saddle")


def worker_count(requested: int | None = None) -> int:
    """ATTOSTM_WORKERS wins over the command line; the fallback is one worker."""
    env = os.environ.get("ATTOSTM_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"ATTOSTM_WORKERS must be an integer, got {env!r}") from None
    else:
        n = requested or 1
    if n < 1:
        raise ConfigError("worker count must be at least 1")
    return n


@dataclass(frozen=True)
class ScanSpec:
    axis: str
    start: float
    stop: float
    steps: int
    methods: tuple = ("tdse",)
    workers: int = 1

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown scan axis {self.axis!r}; expected one of {', '.join(AXES)}")
        if not isinstance(self.steps, int) or self.steps < 2:
            raise ConfigError("a scan needs at least 2 steps")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise ConfigError("scan range must be finite")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"unknown method(s) {bad}; expected a subset of {', '.join(METHODS)}")
        if self.axis == "energy" and set(self.methods) != {"saddle"}:
            raise ConfigError("the energy axis is only defined for the saddle method")
        if self.workers < 1:
            raise ConfigError("worker count must be at least 1")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def overrides(self, value: float) -> dict:
        key = AXES[self.axis]
        return {} if key is None else {key: float(value)}


@dataclass
class RunRecord:
    index: int
    axis: str
    value: float
    method: str
    snapshot: str
    outputs: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    wall_time: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def content_hash(self) -> str:
        """sha256 over the snapshot, the point identity and every output (wall time excluded)."""
        h = hashlib.sha256()
        h.update(self.snapshot.encode())
        h.update(f"{self.method}|{self.axis}|{self.value!r}".encode())
        for name in sorted(self.outputs):
            h.update(name.encode())
            h.update(self.outputs[name].encode())
        h.update(json.dumps(self.summary, sort_keys=True).encode())
        h.update((self.error or "").encode())
        return h.hexdigest()

    def as_dict(self) -> dict:
        return {"index": self.index, "axis": self.axis, "value": self.value, "method": self.method,
                "summary": self.summary, "diagnostics": self.diagnostics, "wall_time_s": self.wall_time,
                "error": self.error, "content_hash": self.content_hash, "outputs": sorted(self.outputs)}

    def write(self, directory) -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "config.snapshot.toml").write_text(self.snapshot)
        for name, text in self.outputs.items():
            (d / name).write_text(text)
        (d / "record.json").write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True, default=str))
        return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def evaluate_point(cfg: RunConfig, method: str, axis: str = "", value: float = 0.0) -> tuple[dict, dict, dict]:
    """(summary, outputs, diagnostics) of one scan point."""
    if method == "saddle":
        from .saddle import asymptote_crossing, cutoff_energy, main_branch, travel_time_asymptotics
        from .pulse import Waveform

        j, p = cfg.junction, cfg.pulse
        wf = Waveform.cw(p.peak_field, p.omega, p.static_field + j.static_field, p.cep)
        e0 = j.fermi_level
        summary = {"cutoff_eV": cutoff_energy(j, wf, e0) / EV,
                   "crossing_eV": asymptote_crossing(j, wf, e0) / EV}
        if axis == "energy":
            s = main_branch([value * EV], e0, j, wf)[0]
            est = travel_time_asymptotics(value * EV, e0, j, wf)
            summary.update(re_tau_as=s.tau.real / AS, im_tau_as=s.tau.imag / AS,
                           im_tau_low_as=est["low_E"].imag / AS, im_tau_high_as=est["high_E"].imag / AS,
                           max_residual=s.max_residual)
        return summary, {}, {}
    from .flux import net_current

    res = net_current(cfg.junction, cfg.pulse, method, cfg.grid, cfg.energy, cfg.sfa)
    fwd, bwd = res.spectra
    summary = {"tip_to_sample": res.tip_to_sample, "sample_to_tip": res.sample_to_tip, "net": res.net}
    outputs = {"spectrum_forward.csv": fwd.to_csv(), "spectrum_reverse.csv": bwd.to_csv()}
    diag = {k: v for k, v in fwd.meta.items() if k in ("diagnostics", "rejected_below_level")}
    return summary, outputs, _jsonable(diag)


def run_point(args) -> RunRecord:
    """Evaluate one scan point; solver failures are captured in the record instead of raised."""
    index, base_text, spec_axis, overrides, value, method = args
    t0 = time.perf_counter()
    snapshot = ""
    try:
        cfg = parse_config(base_text, overrides)
        snapshot = dump_config(cfg.raw)
        summary, outputs, diag = evaluate_point(cfg, method, spec_axis, value)
        return RunRecord(index, spec_axis, float(value), method, snapshot, outputs, _jsonable(summary), diag,
                         time.perf_counter() - t0)
    except (AttostmError, ArithmeticError, ValueError) as exc:
        diag = _jsonable(getattr(exc, "diagnostics", {}) or {})
        return RunRecord(index, spec_axis, float(value), method, snapshot, {}, {}, diag,
                         time.perf_counter() - t0, f"{type(exc).__name__}: {exc}")


@dataclass
class ScanResult:
    spec: ScanSpec
    records: list

    @property
    def failures(self) -> list:
        return [r for r in self.records if not r.ok]

    def column(self, method: str, key: str) -> tuple[np.ndarray, np.ndarray]:
        rows = [r for r in self.records if r.method == method and r.ok and key in r.summary]
        return np.array([r.value for r in rows]), np.array([r.summary[key] for r in rows])

    def to_csv(self) -> str:
        keys = sorted({k for r in self.records for k in r.summary})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", self.spec.axis, "method", "status", *keys])
        for r in self.records:
            w.writerow([r.index, f"{r.value:.10g}", r.method, "ok" if r.ok else "failed",
                        *[f"{r.summary[k]:.10e}" if k in r.summary else "" for k in keys]])
        return buf.getvalue()


def run_scan(base_text: str, spec: ScanSpec, out_dir=None, extra_sections=()) -> ScanResult:
    """Run every (value, method) point on a fixed-size pool and reduce by scan index."""
    parse_config(base_text, extra_sections=extra_sections)   # fail fast on a bad base config
    if extra_sections:
        base_text = dump_config(parse_config(base_text, extra_sections=extra_sections).raw)
    jobs = []
    for i, v in enumerate(spec.values):
        for m in spec.methods:
            jobs.append((len(jobs), base_text, spec.axis, spec.overrides(v), float(v), m))
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            records = list(ex.map(run_point, jobs))
    else:
        records = [run_point(j) for j in jobs]
    records.sort(key=lambda r: r.index)
    result = ScanResult(spec, records)
    if out_dir is not None:
        write_scan(result, out_dir)
    return result


def write_scan(result: ScanResult, out_dir) -> Path:
    from .plot import line_plot

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for r in result.records:
        r.write(out / "points" / f"{r.index:04d}_{r.method}")
    (out / "scan.csv").write_text(result.to_csv())
    spec = result.spec
    meta = {"axis": spec.axis, "from": spec.start, "to": spec.stop, "steps": spec.steps,
            "methods": list(spec.methods), "workers": spec.workers,
            "hashes": [r.content_hash for r in result.records],
            "failures": [{"index": r.index, "value": r.value, "method": r.method, "error": r.error}
                         for r in result.failures]}
    meta["scan_hash"] = hashlib.sha256("".join(meta["hashes"]).encode()).hexdigest()
    (out / "scan.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    series, logy = {}, False
    for m in spec.methods:
        if m == "saddle":
            key = "im_tau_as" if spec.axis == "energy" else "cutoff_eV"
        else:
            key = "net" if spec.axis == "cep" else "tip_to_sample"
            logy = spec.axis == "field"
        x, y = result.column(m, key)
        series[f"{m} {key}"] = (x, y)
    line_plot(series, out / "scan.svg", title=f"scan over {spec.axis}", xlabel=spec.axis, ylabel="value",
              logy=logy, logx=logy)
    return out
