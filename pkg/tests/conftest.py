import math

import pytest

from leosec.orbits import GroundStation, ShellConfig, propagate

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; printed in the
    terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] AC{number:02d} {title}" + (f" -- {detail}" if detail else ""))
        assert passed, f"AC{number} {title}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def small_shell():
    return ShellConfig(altitude_km=630.0, inclination_deg=51.9, num_planes=6, sats_per_plane=6)


def station_under(shell, sat, name="under", t_s=0.0, min_elevation_deg=25.0):
    """Ground station at the sub-satellite point at the epoch (inertial and
    Earth-fixed frames coincide at t=0)."""
    p = propagate(shell, sat, t_s)
    lat = math.degrees(math.asin(p.z_km / p.norm()))
    lon = math.degrees(math.atan2(p.y_km, p.x_km))
    return GroundStation(name, lat, lon, min_elevation_deg)
