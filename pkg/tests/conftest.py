import pytest

from attostm.config import GridConfig
from attostm.units import AS, NM, JunctionConfig, PulseConfig


@pytest.fixture
def small_grid():
    """Coarse, short box: cheap runs for structural checks (not for physics numbers)."""
    return GridConfig(dx=0.02 * NM, dt=4.0 * AS, x_span=40.0 * NM)


@pytest.fixture
def gap():
    return JunctionConfig.from_user(0.5)


@pytest.fixture
def short_pulse():
    return PulseConfig.from_user(20.0, fwhm_fs=1.5)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
