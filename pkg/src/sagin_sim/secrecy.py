"""Secrecy-capacity core: aggregate eavesdropping capacity over the distance
distribution, the non-negative secrecy gap, a Monte Carlo cross-check, and
the exponential risk-probability metric."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, mean_snr
from .geometry import (
    GeometryConfig,
    distance_pdf,
    effective_half_angle,
    max_los_distance,
    threat_probability,
)


class QuadratureError(ValueError):
    pass


class QuadratureRule(str, enum.Enum):
    MIDPOINT = "midpoint"
    SIMPSON = "simpson"


@dataclass(frozen=True)
class QuadratureConfig:
    num_intervals: int = 4096
    rule: QuadratureRule = QuadratureRule.SIMPSON

    def __post_init__(self):
        if not isinstance(self.rule, QuadratureRule):
            object.__setattr__(self, "rule", QuadratureRule(self.rule))
        if self.num_intervals < 2:
            raise QuadratureError("num_intervals must be >= 2")
        if self.rule is QuadratureRule.SIMPSON and self.num_intervals % 2:
            raise QuadratureError("num_intervals must be even for Simpson's rule")


@dataclass(frozen=True)
class SecrecyReport:
    """Per-satellite security snapshot."""

    satellite_id: int
    legit_snr: float
    eavesdrop_capacity: float  # bit/s
    secrecy_capacity: float  # bit/s, clamped at 0
    threat_probability: float
    half_angle_rad: float


@dataclass(frozen=True)
class RiskParams:
    secrecy_demand: float = 0.0
    risk_exponent: float = 1.0

    def __post_init__(self):
        if self.secrecy_demand < 0:
            raise ValueError("secrecy_demand must be >= 0")
        if self.risk_exponent <= 0:
            raise ValueError("risk_exponent must be > 0")


def eavesdrop_capacity_at(d_e: float, channel: ChannelConfig) -> float:
    """Interception rate W*log2(1+snr(d_e)) of a single eavesdropper at distance d_e."""
    return channel.bandwidth_hz * math.log2(1.0 + mean_snr(d_e, channel))


def _composite_integral(f, a: float, b: float, quad: QuadratureConfig) -> float:
    n = quad.num_intervals
    if quad.rule is QuadratureRule.MIDPOINT:
        h = (b - a) / n
        x = a + h * (np.arange(n) + 0.5)
        return float(h * np.sum(f(x)))
    x = np.linspace(a, b, n + 1)
    y = f(x)
    h = (b - a) / n
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-1:2])))


def total_eavesdrop_capacity(
    satellite_id: int,
    geom: GeometryConfig,
    channel: ChannelConfig,
    quad: QuadratureConfig,
) -> float:
    """Aggregate expected interception rate against one serving satellite.

    Expectation over the eavesdropper distance density on (He, Dmax], scaled by
    the eavesdropper count and the coverage-cap threat probability.  Exactly 0
    with no eavesdroppers, linear in their count.
    """
    k = geom.num_eavesdroppers
    if k == 0:
        return 0.0
    r = geom.earth_radius_km
    h_e = geom.eavesdropper_altitude_km
    p_s = threat_probability(r, geom.altitudes_km[satellite_id])
    d_max = max_los_distance(geom, satellite_id)
    w = channel.bandwidth_hz

    def integrand(d):
        return d * np.log2(1.0 + mean_snr(d, channel))

    integral = _composite_integral(integrand, h_e, d_max, quad)
    return k * w * p_s / (2.0 * r * (r + h_e)) * integral


def monte_carlo_eavesdrop_capacity(
    geom: GeometryConfig,
    channel: ChannelConfig,
    n_samples: int,
    rng: np.random.Generator,
    satellite_id: int = 0,
    chunk: int = 1_000_000,
) -> float:
    """Independent Monte Carlo estimate of the aggregate eavesdropping capacity.

    Eavesdroppers are drawn uniformly on the shell of radius R+He and their
    distance is taken to the sub-satellite surface point, matching the
    geometric derivation of the distance density.  Cone membership is an
    independent uniform-direction draw against the coverage half-angle, so the
    distance and cone factors enter as the product the analytic expression
    assumes.  Samples outside (He, Dmax] contribute zero.
    """
    k = geom.num_eavesdroppers
    if k == 0:
        return 0.0
    r = geom.earth_radius_km
    h_i = geom.altitudes_km[satellite_id]
    h_e = geom.eavesdropper_altitude_km
    d_max = max_los_distance(geom, satellite_id)
    cos_psi = math.cos(effective_half_angle(r, h_i))
    w = channel.bandwidth_hz
    axis = np.array([1.0, 0.0, 0.0])  # satellite radial direction; isotropy makes it arbitrary
    ref_point = r * axis

    total = 0.0
    done = 0
    while done < n_samples:
        n = min(chunk, n_samples - done)
        pts = rng.normal(size=(n, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        d = np.linalg.norm((r + h_e) * pts - ref_point, axis=1)
        cone_dirs = rng.normal(size=(n, 3))
        cone_dirs /= np.linalg.norm(cone_dirs, axis=1, keepdims=True)
        in_cone = cone_dirs @ axis >= cos_psi
        mask = in_cone & (d > h_e) & (d <= d_max)
        if np.any(mask):
            total += np.sum(w * np.log2(1.0 + mean_snr(d[mask], channel)))
        done += n
    return k * total / n_samples


def secrecy_capacity(
    legit_snr: float,
    eavesdrop_capacity: float,
    bandwidth_hz: float,
    legit_term_includes_bandwidth: bool = True,
) -> float:
    """Non-negative gap between legitimate capacity and aggregate interception rate.

    The legitimate term carries the bandwidth factor by default so both terms
    are rates; the flag drops it to reproduce the bare spectral-efficiency form.
    """
    if legit_snr < 0:
        raise ValueError("legit_snr must be >= 0")
    scale = bandwidth_hz if legit_term_includes_bandwidth else 1.0
    return max(0.0, scale * math.log2(1.0 + legit_snr) - eavesdrop_capacity)


def expected_eavesdropper_count(
    d_e: float, delta: float, satellite_id: int, geom: GeometryConfig
) -> float:
    """Expected eavesdroppers in [d_e, d_e+delta] inside the coverage cap (piecewise)."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    p_s = threat_probability(geom.earth_radius_km, geom.altitudes_km[satellite_id])
    return geom.num_eavesdroppers * distance_pdf(d_e, geom, satellite_id) * delta * p_s


def risk_probability_value(capacity: float, demand: float, risk_exponent: float) -> float:
    """Exponential shortfall risk: 0 when demand is met, 1-exp(-k*(SD-C)) otherwise."""
    if demand <= capacity:
        return 0.0
    return 1.0 - math.exp(-risk_exponent * (demand - capacity))


def risk_probability(report: SecrecyReport, risk: RiskParams) -> float:
    return risk_probability_value(report.secrecy_capacity, risk.secrecy_demand, risk.risk_exponent)
