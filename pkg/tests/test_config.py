import pytest
from hypothesis import given, settings, strategies as st

from attostm.config import dump_config, load_config, parse_config
from attostm.errors import ConfigError
from attostm.units import AS, EV, NM

MINIMAL = "[junction]\nd_nm = 1.0\n[pulse]\nfield_Vnm = 35.0\n"


def test_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.junction.d == pytest.approx(NM)
    assert cfg.grid.dx == pytest.approx(0.01 * NM)
    assert cfg.grid.dt == pytest.approx(2.2 * AS)
    assert cfg.energy.values[0] == pytest.approx(-4.5 * EV)
    assert cfg.energy.n_points == 496


def test_unknown_key_reports_line():
    text = MINIMAL + "[grid]\ndx_nm = 0.01\nbogus = 3\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == 7


def test_wrong_type_reports_line():
    with pytest.raises(ConfigError) as exc:
        parse_config('[junction]\nd_nm = "wide"\n[pulse]\nfield_Vnm = 1.0\n')
    assert exc.value.line == 2


def test_malformed_toml_reports_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("[junction]\nd_nm = 1.0\n[pulse\n")
    assert exc.value.line == 3


def test_missing_required():
    with pytest.raises(ConfigError):
        parse_config("[junction]\nd_nm = 1.0\n")


def test_invalid_value_anchored_to_section():
    with pytest.raises(ConfigError) as exc:
        parse_config("[junction]\nd_nm = -1.0\n[pulse]\nfield_Vnm = 1.0\n")
    assert exc.value.line == 1


def test_unknown_section_and_extra_sections():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "[recipe]\nid = 'x'\n")
    cfg = parse_config(MINIMAL + "[recipe]\nid = 'x'\n", extra_sections=("recipe",))
    assert cfg.pulse.peak_field > 0


def test_overrides():
    cfg = parse_config(MINIMAL, {"pulse.cep_rad": 1.25, "junction.d_nm": 0.5})
    assert cfg.pulse.cep == 1.25 and cfg.junction.d == pytest.approx(0.5 * NM)
    with pytest.raises(ConfigError):
        parse_config(MINIMAL, {"pulse.nope": 1.0})


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.0, 60.0), st.floats(-3.0, 3.0))
def test_dump_round_trip(d, F, cep):
    cfg = parse_config(MINIMAL, {"junction.d_nm": d, "pulse.field_Vnm": F, "pulse.cep_rad": cep})
    again = parse_config(dump_config(cfg.raw))
    assert again.raw == cfg.raw
    assert dump_config(again.raw) == dump_config(cfg.raw)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")
