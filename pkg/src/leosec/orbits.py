"""Walker-delta constellation geometry, circular-orbit propagation and
ground-station visibility.

Epoch convention: at ``t = 0`` the ascending node of plane 0 lies on the
+x axis and the Greenwich meridian also points along +x, so inertial and
Earth-fixed frames coincide at the epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EarthModel:
    radius_km: float = 6371.0
    mu_km3s2: float = 398600.4418
    rotation_rate_rad_s: float = 7.2921159e-5

    def __post_init__(self) -> None:
        for name in ("radius_km", "mu_km3s2", "rotation_rate_rad_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"EarthModel.{name} must be strictly positive")


EARTH = EarthModel()


@dataclass(frozen=True)
class ShellConfig:
    """One Walker-delta shell.

    Defaults follow a Kuiper-like first shell (630 km, 51.9 deg, 34 x 34).
    """

    altitude_km: float = 630.0
    inclination_deg: float = 51.9
    num_planes: int = 34
    sats_per_plane: int = 34
    phasing_factor: int = 0

    def __post_init__(self) -> None:
        if not self.altitude_km > 0:
            raise ValueError("altitude_km must be > 0")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ValueError("inclination_deg must lie in [0, 180]")
        if self.num_planes < 1 or self.sats_per_plane < 1:
            raise ValueError("num_planes and sats_per_plane must be >= 1")
        if not 0 <= self.phasing_factor < self.num_planes:
            raise ValueError("phasing_factor must lie in [0, num_planes)")

    @property
    def total(self) -> int:
        return self.num_planes * self.sats_per_plane

    def semi_major_axis_km(self, earth: EarthModel = EARTH) -> float:
        return earth.radius_km + self.altitude_km

    def mean_motion_rad_s(self, earth: EarthModel = EARTH) -> float:
        a = self.semi_major_axis_km(earth)
        return math.sqrt(earth.mu_km3s2 / a**3)

    def period_s(self, earth: EarthModel = EARTH) -> float:
        return 2.0 * math.pi / self.mean_motion_rad_s(earth)

    def satellites(self) -> list[SatelliteId]:
        return [
            SatelliteId(p, s)
            for p in range(self.num_planes)
            for s in range(self.sats_per_plane)
        ]


@dataclass(frozen=True, order=True)
class SatelliteId:
    plane: int
    slot: int

    def index(self, shell: ShellConfig) -> int:
        """Flat ordinal, plane-major."""
        return self.plane * shell.sats_per_plane + self.slot

    @classmethod
    def from_index(cls, index: int, shell: ShellConfig) -> SatelliteId:
        if not 0 <= index < shell.total:
            raise ValueError(f"satellite index {index} out of range for {shell.total} satellites")
        return cls(*divmod(index, shell.sats_per_plane))


@dataclass(frozen=True)
class GroundStation:
    name: str
    latitude_deg: float
    longitude_deg: float
    min_elevation_deg: float = 25.0

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"{self.name}: latitude_deg must lie in [-90, 90]")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"{self.name}: longitude_deg must lie in [-180, 180]")
        if not 0.0 <= self.min_elevation_deg < 90.0:
            raise ValueError(f"{self.name}: min_elevation_deg must lie in [0, 90)")


@dataclass(frozen=True)
class Position:
    """Earth-centred inertial coordinates in km."""

    x_km: float
    y_km: float
    z_km: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x_km, self.y_km, self.z_km)):
            raise ValueError("Position components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x_km, self.y_km, self.z_km])

    def norm(self) -> float:
        return math.sqrt(self.x_km**2 + self.y_km**2 + self.z_km**2)


def _check_sat(shell: ShellConfig, sat: SatelliteId) -> None:
    if not (0 <= sat.plane < shell.num_planes and 0 <= sat.slot < shell.sats_per_plane):
        raise ValueError(
            f"satellite (plane={sat.plane}, slot={sat.slot}) out of range for "
            f"{shell.num_planes}x{shell.sats_per_plane} shell"
        )


def _orbit_angles(shell: ShellConfig, plane, slot, t_s: float, earth: EarthModel):
    """RAAN and argument of latitude (radians); works on scalars or arrays."""
    total = shell.total
    raan = np.radians(plane * (360.0 / shell.num_planes))
    u = (
        np.radians(slot * (360.0 / shell.sats_per_plane))
        + np.radians(plane * shell.phasing_factor * (360.0 / total))
        + t_s * shell.mean_motion_rad_s(earth)
    )
    return raan, u


def _circular_to_eci(a, inc, raan, u):
    cos_u, sin_u = np.cos(u), np.sin(u)
    cos_o, sin_o = np.cos(raan), np.sin(raan)
    cos_i, sin_i = math.cos(inc), math.sin(inc)
    x = a * (cos_o * cos_u - sin_o * sin_u * cos_i)
    y = a * (sin_o * cos_u + cos_o * sin_u * cos_i)
    z = a * (sin_u * sin_i)
    return x, y, z


def propagate(
    shell: ShellConfig, sat: SatelliteId, t_s: float, earth: EarthModel = EARTH
) -> Position:
    """Inertial position of ``sat`` at ``t_s`` seconds after the epoch."""
    _check_sat(shell, sat)
    if t_s < 0:
        raise ValueError("t_s must be >= 0")
    raan, u = _orbit_angles(shell, sat.plane, sat.slot, t_s, earth)
    x, y, z = _circular_to_eci(
        shell.semi_major_axis_km(earth), math.radians(shell.inclination_deg), raan, u
    )
    return Position(float(x), float(y), float(z))


def constellation_positions(
    shell: ShellConfig, t_s: float, earth: EarthModel = EARTH
) -> np.ndarray:
    """All satellite positions as a ``(total, 3)`` array in flat-index order.

    Row ``i`` equals ``propagate(shell, SatelliteId.from_index(i, shell), t_s)``.
    """
    if t_s < 0:
        raise ValueError("t_s must be >= 0")
    idx = np.arange(shell.total)
    plane, slot = np.divmod(idx, shell.sats_per_plane)
    raan, u = _orbit_angles(shell, plane, slot, t_s, earth)
    x, y, z = _circular_to_eci(
        shell.semi_major_axis_km(earth), math.radians(shell.inclination_deg), raan, u
    )
    return np.stack([x, y, z], axis=1)


def ground_position(gs: GroundStation, t_s: float, earth: EarthModel = EARTH) -> Position:
    lat = math.radians(gs.latitude_deg)
    lon = math.radians(gs.longitude_deg) + earth.rotation_rate_rad_s * t_s
    r = earth.radius_km
    return Position(
        r * math.cos(lat) * math.cos(lon),
        r * math.cos(lat) * math.sin(lon),
        r * math.sin(lat),
    )


def distance_km(a: Position, b: Position) -> float:
    return math.sqrt((a.x_km - b.x_km) ** 2 + (a.y_km - b.y_km) ** 2 + (a.z_km - b.z_km) ** 2)


def elevation_deg(sat_pos: Position, gs_pos: Position) -> float:
    """Elevation of ``sat_pos`` above the local horizon plane at ``gs_pos``.

    The horizon is the plane orthogonal to the geocentric radius through the
    station (spherical Earth). A satellite at the station itself counts as
    zenith.
    """
    g = (gs_pos.x_km, gs_pos.y_km, gs_pos.z_km)
    g_norm = math.sqrt(sum(c * c for c in g))
    if g_norm == 0:
        raise ValueError("gs_pos must not be the Earth's centre")
    v = (sat_pos.x_km - g[0], sat_pos.y_km - g[1], sat_pos.z_km - g[2])
    v_norm = math.sqrt(sum(c * c for c in v))
    if v_norm == 0:
        return 90.0
    sin_el = (v[0] * g[0] + v[1] * g[1] + v[2] * g[2]) / (v_norm * g_norm)
    return math.degrees(math.asin(min(1.0, max(-1.0, sin_el))))


def visible(sat_pos: Position, gs: GroundStation, gs_pos: Position) -> bool:
    # threshold is inclusive
    return elevation_deg(sat_pos, gs_pos) >= gs.min_elevation_deg
