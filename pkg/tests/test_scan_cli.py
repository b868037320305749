import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from attostm.cli import main
from attostm.errors import ConfigError
from attostm.scan import ScanSpec, run_scan, worker_count

TINY = """
[junction]
d_nm = 1.0

[pulse]
field_Vnm = 20.0
fwhm_fs = 1.5

[grid]
dx_nm = 0.02
dt_as = 4.0
x_span_nm = 40.0

[spectrum]
e_min_eV = -3.0
e_max_eV = 15.0
n_points = 12
"""

SADDLE = """
[junction]
d_nm = {d}

[pulse]
field_Vnm = 35.0

[spectrum]
e_min_eV = 1.0
e_max_eV = 40.0
n_points = 12
"""

TRAVEL = """
[recipe]
id = "custom"
procedure = "travel_time"
params = {{ energies_eV = {energies} }}

[gate]
low_below = 0.5
high_above = 1.5
asymptote_rel = 0.10
crossing_rel = 0.02

[junction]
d_nm = 1.0

[pulse]
field_Vnm = 35.0
"""


@pytest.mark.parametrize("kwargs", [
    dict(axis="height", start=0, stop=1, steps=3),
    dict(axis="field", start=1, stop=2, steps=1),
    dict(axis="field", start=1, stop=float("nan"), steps=3),
    dict(axis="field", start=1, stop=2, steps=3, methods=("wkb",)),
    dict(axis="energy", start=1, stop=2, steps=3, methods=("tdse",)),
    dict(axis="cep", start=0, stop=1, steps=3, workers=0),
])
def test_scan_spec_rejects_bad_input(kwargs):
    with pytest.raises(ConfigError):
        ScanSpec(**kwargs)


def test_scan_spec_values_and_overrides():
    s = ScanSpec("width", 0.5, 1.5, 3)
    np.testing.assert_allclose(s.values, [0.5, 1.0, 1.5])
    assert s.overrides(1.0) == {"junction.d_nm": 1.0}
    assert ScanSpec("energy", 1, 5, 2, ("saddle",)).overrides(3.0) == {}


def test_worker_count_environment_override(monkeypatch):
    monkeypatch.delenv("ATTOSTM_WORKERS", raising=False)
    assert worker_count(None) == 1
    assert worker_count(3) == 3
    monkeypatch.setenv("ATTOSTM_WORKERS", "2")
    assert worker_count(8) == 2
    monkeypatch.setenv("ATTOSTM_WORKERS", "many")
    with pytest.raises(ConfigError):
        worker_count(1)


def test_scan_is_deterministic_and_ordered(tmp_path):
    spec = ScanSpec("cep", 0.0, np.pi, 2, ("tdse",), workers=1)
    a = run_scan(TINY, spec, tmp_path / "a")
    b = run_scan(TINY, ScanSpec("cep", 0.0, np.pi, 2, ("tdse",), workers=2), tmp_path / "b")
    assert [r.content_hash for r in a.records] == [r.content_hash for r in b.records]
    assert [r.index for r in b.records] == [0, 1]
    meta_a = json.loads((tmp_path / "a" / "scan.json").read_text())
    meta_b = json.loads((tmp_path / "b" / "scan.json").read_text())
    assert meta_a["scan_hash"] == meta_b["scan_hash"]
    assert (tmp_path / "a" / "points" / "0000_tdse" / "spectrum_forward.csv").exists()
    ET.parse(tmp_path / "a" / "scan.svg")
    # CEP 0 and pi swap the two directions of a symmetric junction
    net = [r.summary["net"] for r in a.records]
    assert net[0] == pytest.approx(-net[1], rel=1e-6, abs=1e-12 * a.records[0].summary["tip_to_sample"])


def test_failed_points_are_recorded_not_raised(tmp_path):
    spec = ScanSpec("width", -0.5, 1.0, 3, ("saddle",))
    res = run_scan(SADDLE.format(d=1.0), spec, tmp_path)
    # a point fails when the gap is unphysical or has no plateau: 35 V/nm * d < 5 eV
    expect = [d > 0 and 35.0 * d > 5.0 for d in spec.values]
    assert [r.ok for r in res.records] == expect == [False, True, True]
    meta = json.loads((tmp_path / "scan.json").read_text())
    assert [f["index"] for f in meta["failures"]] == [0]
    assert "failed" in (tmp_path / "scan.csv").read_text()


def test_energy_scan_reports_travel_times(tmp_path):
    res = run_scan(SADDLE.format(d=1.0), ScanSpec("energy", 2.0, 10.0, 3, ("saddle",)), tmp_path)
    assert all(r.ok for r in res.records)
    x, y = res.column("saddle", "im_tau_as")
    assert np.all(y < 0) and x.size == 3


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_saddle_ok(tmp_path):
    cfg = write(tmp_path, "s.toml", SADDLE.format(d=1.0))
    assert main(["saddle", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["cutoff_eV"] == pytest.approx(30.0, rel=1e-6)
    ET.parse(tmp_path / "o" / "travel_times.svg")


def test_cli_config_errors(tmp_path, capsys):
    bad = write(tmp_path, "bad.toml", "[junction]\nd_nm = 'wide'\n[pulse]\nfield_Vnm = 1.0\n")
    assert main(["tdse", "--config", bad, "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err
    assert main(["reproduce", "fig99", "--out", str(tmp_path / "r")]) == 2
    cfg = write(tmp_path, "s.toml", SADDLE.format(d=1.0))
    assert main(["scan", "--config", cfg, "--out", str(tmp_path / "x"), "--axis", "field"]) == 2


def test_cli_solver_error(tmp_path):
    cfg = write(tmp_path, "s.toml", SADDLE.format(d=0.1))
    assert main(["saddle", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    err = json.loads((tmp_path / "o" / "error.json").read_text())
    assert err["error"] == "DomainError"


def test_cli_reproduce_gate(tmp_path):
    ok = write(tmp_path, "ok.toml", TRAVEL.format(energies="[0.5, 2.0, 5.0, 10.0]"))
    assert main(["reproduce", "--config", ok, "--out", str(tmp_path / "ok")]) == 0
    check = json.loads((tmp_path / "ok" / "check.json").read_text())
    assert check["passed"] is True
    strict = TRAVEL.replace("asymptote_rel = 0.10", "asymptote_rel = 1e-6")
    bad = write(tmp_path, "bad.toml", strict.format(energies="[0.5, 2.0, 5.0]"))
    assert main(["reproduce", "--config", bad, "--out", str(tmp_path / "bad")]) == 4


def test_cli_tdse_run(tmp_path):
    cfg = write(tmp_path, "t.toml", TINY)
    assert main(["tdse", "--config", cfg, "--out", str(tmp_path / "o"), "--map-stride", "20"]) == 0
    out = tmp_path / "o"
    for name in ("spectrum.csv", "boundary_current.csv", "summary.json", "config.snapshot.toml",
                 "current_map.csv"):
        assert (out / name).exists(), name
    ET.parse(out / "spectrum.svg")
    ET.parse(out / "current_map.svg")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["flux_balance"]["residual"] < 1e-9
