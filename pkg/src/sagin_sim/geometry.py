"""Spherical geometry for serving satellites and eavesdropper shells.

Satellites move on ideal circular equatorial orbits; devices are static
points on the Earth sphere.  All angles are radians internally, degrees
only at the config boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EARTH_RADIUS_KM = 6371.0
#: standard gravitational parameter of Earth, km^3/s^2
MU_EARTH_KM3_S2 = 398600.4418


class GeometryError(ValueError):
    """Invalid geometric configuration or argument."""


@dataclass(frozen=True)
class GeometryConfig:
    """Constellation layout: Earth radius, orbit altitudes and phases."""

    earth_radius_km: float = EARTH_RADIUS_KM
    serving_altitude_km: float | tuple[float, ...] = 300.0
    eavesdropper_altitude_km: float = 600.0
    serving_phases_deg: tuple[float, ...] = (0.0, 90.0, 180.0, 270.0)
    num_serving: int = 4
    num_eavesdroppers: int = 3

    def __post_init__(self):
        object.__setattr__(self, "serving_phases_deg", tuple(float(p) for p in self.serving_phases_deg))
        if isinstance(self.serving_altitude_km, (list, tuple, np.ndarray)):
            object.__setattr__(self, "serving_altitude_km", tuple(float(h) for h in self.serving_altitude_km))
        if self.earth_radius_km <= 0:
            raise GeometryError("earth_radius_km must be > 0")
        if self.eavesdropper_altitude_km <= 0:
            raise GeometryError("eavesdropper_altitude_km must be > 0")
        if self.num_serving < 1:
            raise GeometryError("num_serving must be >= 1")
        if self.num_eavesdroppers < 0:
            raise GeometryError("num_eavesdroppers must be >= 0")
        if len(self.serving_phases_deg) != self.num_serving:
            raise GeometryError(
                f"serving_phases_deg needs exactly num_serving={self.num_serving} entries, "
                f"got {len(self.serving_phases_deg)}"
            )
        for p in self.serving_phases_deg:
            if not 0.0 <= p < 360.0:
                raise GeometryError(f"phase {p} outside [0, 360)")
        for h in self.altitudes_km:
            if h <= 0:
                raise GeometryError("serving altitudes must be > 0")

    @property
    def altitudes_km(self) -> tuple[float, ...]:
        """Per-satellite altitude, broadcasting a scalar config value."""
        h = self.serving_altitude_km
        if isinstance(h, tuple):
            if len(h) != self.num_serving:
                raise GeometryError(
                    f"serving_altitude_km needs 1 or num_serving={self.num_serving} entries, got {len(h)}"
                )
            return h
        return (float(h),) * self.num_serving


@dataclass(frozen=True)
class SatellitePosition:
    satellite_id: int
    position: np.ndarray  # Earth-centered frame, km
    altitude_km: float


def orbital_angular_velocity(orbit_radius_km: float) -> float:
    """Angular velocity (rad/s) of a circular orbit from Kepler's third law."""
    if orbit_radius_km <= 0:
        raise GeometryError("orbit radius must be > 0")
    return math.sqrt(MU_EARTH_KM3_S2 / orbit_radius_km**3)


def serving_positions(config: GeometryConfig, epoch_s: float = 0.0) -> list[SatellitePosition]:
    """Positions of the serving satellites on their equatorial circles at `epoch_s`."""
    out = []
    for i, (phase_deg, h) in enumerate(zip(config.serving_phases_deg, config.altitudes_km)):
        r = config.earth_radius_km + h
        theta = math.radians(phase_deg) + orbital_angular_velocity(r) * epoch_s
        pos = np.array([r * math.cos(theta), r * math.sin(theta), 0.0])
        out.append(SatellitePosition(satellite_id=i, position=pos, altitude_km=h))
    return out


def effective_half_angle(earth_radius_km: float, serving_altitude_km: float) -> float:
    """Half-angle (rad) of the coverage cone of a satellite at the given altitude.

    Zero altitude is the degenerate surface limit and yields 0.
    """
    if earth_radius_km <= 0:
        raise GeometryError("earth_radius_km must be > 0")
    if serving_altitude_km < 0:
        raise GeometryError("serving_altitude_km must be >= 0")
    return math.acos(earth_radius_km / (earth_radius_km + serving_altitude_km))


def threat_probability(earth_radius_km: float, serving_altitude_km: float) -> float:
    """Probability that a uniformly placed eavesdropper falls in the coverage cap."""
    psi = effective_half_angle(earth_radius_km, serving_altitude_km)
    return (1.0 - math.cos(psi)) / 2.0


def max_los_distance(config: GeometryConfig, satellite_id: int = 0) -> float:
    """Longest serving-to-eavesdropper distance with both endpoints above the horizon.

    Both shells see each other as long as neither link segment dips below the
    Earth tangent; the bound is the sum of the two horizon slant ranges.
    """
    r = config.earth_radius_km
    h_i = config.altitudes_km[satellite_id]
    h_e = config.eavesdropper_altitude_km
    return math.sqrt((r + h_i) ** 2 - r**2) + math.sqrt((r + h_e) ** 2 - r**2)


def distance_pdf(d_e, config: GeometryConfig, satellite_id: int = 0):
    """Eavesdropper distance density d/(2R(R+He)) on (He, Dmax], 0 outside.

    The truncation at Dmax leaves total mass below 1 by construction; the
    density is used as printed, not renormalized.
    """
    r = config.earth_radius_km
    h_e = config.eavesdropper_altitude_km
    d_max = max_los_distance(config, satellite_id)
    d = np.asarray(d_e, dtype=float)
    val = np.where((d > h_e) & (d <= d_max), d / (2.0 * r * (r + h_e)), 0.0)
    if np.isscalar(d_e) or getattr(d_e, "ndim", 1) == 0:
        return float(val)
    return val


def uniform_cap_points(
    axis: np.ndarray, half_angle_rad: float, radius_km: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample `n` points uniformly on the spherical cap of the given angular radius.

    The cap sits on the sphere of `radius_km` centered at the origin, around `axis`.
    """
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    cos_t = rng.uniform(math.cos(half_angle_rad), 1.0, size=n)
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t**2))
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    local = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=1)
    # orthonormal frame with e3 = axis
    helper = np.array([0.0, 0.0, 1.0]) if abs(axis[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    basis = np.stack([e1, e2, axis], axis=0)
    return radius_km * local @ basis
