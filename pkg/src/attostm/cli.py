"""attostm command line: single runs, sweeps, method comparison and figure recipes.

Exit codes: 0 ok, 2 configuration error, 3 solver error, 4 acceptance gate failed (reproduce).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from .config import dump_config, load_config
from .errors import AttostmError, ConfigError
from .units import AS, EV, FS, NM

log = logging.getLogger("attostm")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_GATE = 0, 2, 3, 4


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_default))


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def _prepare(args):
    from .recipes import RECIPE_SECTIONS

    cfg = load_config(args.config, extra_sections=RECIPE_SECTIONS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.snapshot.toml").write_text(dump_config(cfg.raw))
    return cfg, out


def cmd_tdse(args) -> int:
    from .flux import flux_balance
    from .plot import heatmap, line_plot
    from .spectrum import knee_energy
    from .tdse import burst_duration, run_laser

    cfg, out = _prepare(args)
    run = run_laser(cfg.junction, cfg.pulse, cfg.grid, map_stride=args.map_stride)
    spec = run.spectrum(cfg.energy.values)
    spec.to_csv(out / "spectrum.csv")
    cm = run.current_map()
    summary = {"total_probability": spec.total(), "boundary_transmission": run.boundary_transmission(),
               "diagnostics": run.diagnostics, "flux_balance": flux_balance(cm).as_dict()}
    for key, fn in (("knee_eV", lambda: knee_energy(spec, 0.5 * EV) / EV),
                    ("burst_fwhm_as", lambda: burst_duration(cm, cfg.junction.d) / AS)):
        try:
            summary[key] = fn()
        except AttostmError as exc:
            summary[key] = None
            summary.setdefault("warnings", []).append(f"{key}: {exc}")
    rows = ["t_fs,j_tip,j_sample"] + [f"{t / FS:.8g},{a:.10e},{b:.10e}"
                                      for t, a, b in zip(cm.bond_times, cm.j_tip, cm.j_sample)]
    (out / "boundary_current.csv").write_text("\n".join(rows) + "\n")
    line_plot({"TDSE": (spec.e_grid / EV, spec.values * EV)}, out / "spectrum.svg", title="tunneling spectrum",
              xlabel="E (eV)", ylabel="log10 dP/dE (1/eV)", logy=True)
    if cm.x.size:
        cm.to_csv(out / "current_map.csv")
        heatmap(cm.x / NM, cm.times / FS, cm.j, out / "current_map.svg", title="probability current",
                xlabel="x (nm)", ylabel="t (fs)")
    _write_json(out / "summary.json", summary)
    return EXIT_OK


def cmd_flux(args) -> int:
    from .flux import flux_spectrum
    from .plot import line_plot

    cfg, out = _prepare(args)
    spec = flux_spectrum(cfg.junction, cfg.pulse, cfg.energy.values, cfg.grid)
    spec.to_csv(out / "spectrum_flux.csv")
    line_plot({"flux form": (spec.e_grid / EV, spec.values * EV)}, out / "spectrum_flux.svg",
              title="flux-form spectrum", xlabel="E (eV)", ylabel="log10 dP/dE (1/eV)", logy=True)
    _write_json(out / "summary.json", {"total_probability": spec.total(), "meta": {
        k: v for k, v in spec.meta.items() if not isinstance(v, np.ndarray)}})
    return EXIT_OK


def cmd_sfa(args) -> int:
    from .plot import line_plot
    from .pulse import Waveform
    from .sfa import sfa_spectrum

    cfg, out = _prepare(args)
    spec = sfa_spectrum(cfg.energy.values, cfg.junction, Waveform.gaussian(cfg.pulse), cfg.sfa)
    spec.to_csv(out / "spectrum_sfa.csv")
    line_plot({"SFA": (spec.e_grid / EV, spec.values * EV)}, out / "spectrum_sfa.svg", title="SFA spectrum",
              xlabel="E (eV)", ylabel="log10 dP/dE (1/eV)", logy=True)
    _write_json(out / "summary.json", {"total_probability": spec.total(),
                                       "diagnostics": spec.meta.get("diagnostics", {}),
                                       "rejected_below_level": spec.meta.get("rejected_below_level", 0)})
    return EXIT_OK


def cmd_saddle(args) -> int:
    from .plot import line_plot
    from .recipes import cw_waveform
    from .saddle import (asymptote_crossing, cutoff_energy, main_branch, saddles_to_csv, trajectory,
                         travel_time_asymptotics)

    cfg, out = _prepare(args)
    j, wf, e0 = cfg.junction, cw_waveform(cfg), cfg.junction.fermi_level
    e = cfg.energy.values
    e = e[e > 0.05 * EV]
    sols = main_branch(e, e0, j, wf)
    saddles_to_csv(sols, out / "saddles.csv")
    rows = ["energy_eV,re_tau_as,im_tau_as,im_tau_low_as,im_tau_high_as,max_residual"]
    for s in sols:
        est = travel_time_asymptotics(s.energy, e0, j, wf)
        rows.append(f"{s.energy / EV:.10g},{s.tau.real / AS:.10g},{s.tau.imag / AS:.10g},"
                    f"{est['low_E'].imag / AS:.10g},{est['high_E'].imag / AS:.10g},{s.max_residual:.3e}")
    (out / "travel_times.csv").write_text("\n".join(rows) + "\n")
    ec = cutoff_energy(j, wf, e0)
    for frac in (0.25, 0.5, 1.0):
        s = sols[int(np.argmin(np.abs(e - frac * ec)))]
        trajectory(s, wf).to_csv(out / f"trajectory_E{s.energy / EV:.1f}eV.csv")
    line_plot({"exact": (e / EV, [-s.tau.imag / AS for s in sols])}, out / "travel_times.svg",
              title="imaginary travel time", xlabel="E (eV)", ylabel="-Im tau (as)")
    _write_json(out / "summary.json", {"cutoff_eV": ec / EV, "crossing_eV": asymptote_crossing(j, wf, e0) / EV,
                                       "worst_residual": max(s.max_residual for s in sols),
                                       "n_energies": len(sols)})
    return EXIT_OK


def cmd_compare(args) -> int:
    from .recipes import compare_report, tdse_and_sfa, tomllib

    cfg, out = _prepare(args)
    gate = tomllib.loads(Path(args.config).read_text()).get("gate", {})
    td, sf = tdse_and_sfa(cfg)
    rep = compare_report(td, sf, gate)
    for name, text in rep.data.items():
        (out / name).write_text(text)
    _write_json(out / "summary.json", rep.as_dict())
    for c in rep.checks:
        print(c.line())
    return EXIT_OK


def cmd_scan(args) -> int:
    from .recipes import RECIPE_SECTIONS
    from .scan import ScanSpec, run_scan, worker_count

    if args.axis is None or args.from_ is None or args.to is None or args.steps is None:
        raise ConfigError("scan needs --axis, --from, --to and --steps")
    spec = ScanSpec(args.axis, args.from_, args.to, args.steps, tuple(args.methods.split(",")),
                    worker_count(args.workers))
    load_config(args.config, extra_sections=RECIPE_SECTIONS)
    text = Path(args.config).read_text()
    res = run_scan(text, spec, args.out, extra_sections=RECIPE_SECTIONS)
    n_bad = len(res.failures)
    print(f"{len(res.records) - n_bad}/{len(res.records)} scan points ok")
    for r in res.failures:
        print(f"failed: index {r.index} {spec.axis}={r.value:g} {r.method}: {r.error}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from .recipes import load_recipe, run_recipe, write_report
    from .scan import worker_count

    recipe = load_recipe(args.figure or args.config)
    rep = run_recipe(recipe, worker_count(args.workers))
    write_report(rep, recipe, args.out)
    for c in rep.checks:
        print(c.line())
    print(f"{recipe.id}: {'PASS' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_GATE


COMMANDS = {"tdse": cmd_tdse, "flux": cmd_flux, "sfa": cmd_sfa, "saddle": cmd_saddle, "compare": cmd_compare,
            "scan": cmd_scan, "reproduce": cmd_reproduce}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="attostm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "reproduce":
            p.add_argument("figure", nargs="?", help="figure id (fig1c, fig2, ...) or recipe path")
            p.add_argument("--config", help="recipe file (alternative to the positional id)")
        else:
            p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "scan":
            p.add_argument("--axis", choices=["field", "width", "cep", "duration", "energy"])
            p.add_argument("--from", dest="from_", type=float)
            p.add_argument("--to", type=float)
            p.add_argument("--steps", type=int)
            p.add_argument("--methods", default="tdse", help="comma list from tdse,flux,sfa,saddle")
        if name == "tdse":
            p.add_argument("--map-stride", type=int, default=0, help="keep every n-th step for the current map")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "reproduce" and not (args.figure or args.config):
        print("error: reproduce needs a figure id or --config", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](args)
    except ConfigError as exc:
        src = getattr(args, "config", None) or getattr(args, "figure", None)
        print(f"config error: {src}: {exc}" if src else f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AttostmError, ArithmeticError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc),
                "diagnostics": getattr(exc, "diagnostics", {}), "traceback": traceback.format_exc()}
        print(f"solver error: {exc}", file=sys.stderr)
        try:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            _write_json(out / "error.json", diag)
        except OSError:
            pass
        return EXIT_SOLVER
    log.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
