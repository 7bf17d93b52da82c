"""Scenario construction: satellite layout at epoch 0, seeded device placement
over the coverage caps, per-satellite secrecy reports, and the share-to-delay
coupling that the game dynamics iterate against."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, FadingMode, mean_snr, sample_snr
from .dynamics import PopulationState, UtilityWeights
from .geometry import (
    GeometryConfig,
    effective_half_angle,
    serving_positions,
    threat_probability,
    uniform_cap_points,
)
from .queueing import QueueConfig, queuing_delays
from .secrecy import QuadratureConfig, SecrecyReport, secrecy_capacity, total_eavesdrop_capacity


@dataclass
class Scenario:
    """One concrete simulation world shared by every strategy arm of a cell.

    Secrecy reports are fixed by geometry and device placement; only queueing
    delay responds to the population shares, so ``evaluate`` is cheap enough
    to call every dynamics step.
    """

    geometry: GeometryConfig
    channel: ChannelConfig
    queue: QueueConfig
    weights: UtilityWeights
    n_devices: int
    sat_positions: np.ndarray  # (M, 3) km
    device_positions: np.ndarray  # (N, 3) km
    reports: list[SecrecyReport]
    share_floor: float = 1.0e-6

    @property
    def num_satellites(self) -> int:
        return len(self.reports)

    def delays(self, shares: np.ndarray) -> np.ndarray:
        arrivals = np.asarray(shares) * self.n_devices * self.queue.per_device_task_rate
        return queuing_delays(arrivals, self.queue)

    def evaluate(self, state: PopulationState) -> tuple[list[SecrecyReport], np.ndarray]:
        return self.reports, self.delays(state.shares)

    def __call__(self, state: PopulationState):
        return self.evaluate(state)

    def average_utility(self, shares: np.ndarray) -> float:
        return float(self.average_utility_batch(np.asarray(shares, dtype=float)[None, :])[0])

    def average_utility_batch(self, share_matrix: np.ndarray) -> np.ndarray:
        """Vectorized system average utility over rows of share vectors."""
        x = np.asarray(share_matrix, dtype=float)
        caps = np.array([r.secrecy_capacity for r in self.reports])
        floored = np.maximum(x, self.share_floor)
        per = (
            self.weights.alpha * caps[None, :] / (floored * self.n_devices)
            - self.weights.beta * self._delay_batch(x)
        )
        return np.sum(x * per, axis=1)

    def _delay_batch(self, x: np.ndarray) -> np.ndarray:
        mu = np.asarray(self.queue.service_rates, dtype=float)[None, :]
        lam = x * self.n_devices * self.queue.per_device_task_rate
        stable = lam < self.queue.utilization_guard * mu
        return np.where(stable, 1.0 / np.where(stable, mu - lam, 1.0), self.queue.overload_delay_cap)


def sample_device_positions(
    geometry: GeometryConfig, n_devices: int, rng: np.random.Generator
) -> np.ndarray:
    """Devices uniform over the union of the serving coverage caps.

    Caps are chosen with probability proportional to their area, then a point
    is drawn uniformly inside; for disjoint caps this is exactly uniform over
    the union.
    """
    sats = serving_positions(geometry, 0.0)
    r = geometry.earth_radius_km
    psis = [effective_half_angle(r, s.altitude_km) for s in sats]
    areas = np.array([1.0 - math.cos(p) for p in psis])
    cap_choice = rng.choice(len(sats), size=n_devices, p=areas / areas.sum())
    points = np.empty((n_devices, 3))
    for i, (sat, psi) in enumerate(zip(sats, psis)):
        mask = cap_choice == i
        k = int(mask.sum())
        if k:
            points[mask] = uniform_cap_points(sat.position, psi, r, k, rng)
    return points


def legitimate_snrs(
    geometry: GeometryConfig,
    channel: ChannelConfig,
    sat_positions: np.ndarray,
    device_positions: np.ndarray,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Per-satellite legitimate-link SNR.

    Averages the link SNR over the devices inside each satellite's own
    coverage cap (its prospective users); an empty cap falls back to the
    nadir distance.  In shadowed-Rician mode each link draws a fading sample.
    """
    r = geometry.earth_radius_km
    snrs = np.empty(len(sat_positions))
    dev_units = device_positions / np.linalg.norm(device_positions, axis=1, keepdims=True)
    for i, sat in enumerate(sat_positions):
        alt = geometry.altitudes_km[i]
        cos_psi = math.cos(effective_half_angle(r, alt))
        sat_unit = sat / np.linalg.norm(sat)
        in_cap = dev_units @ sat_unit >= cos_psi - 1e-12
        if np.any(in_cap):
            d = np.linalg.norm(device_positions[in_cap] - sat[None, :], axis=1)
        else:
            d = np.array([alt])
        if channel.fading_mode is FadingMode.SHADOWED_RICIAN and rng is not None:
            link = sample_snr(d, channel, rng)
        else:
            link = mean_snr(d, channel)
        snrs[i] = float(np.mean(link))
    return snrs


def build_reports(
    geometry: GeometryConfig,
    channel: ChannelConfig,
    quad: QuadratureConfig,
    legit_snrs: np.ndarray,
    legit_term_includes_bandwidth: bool = True,
) -> list[SecrecyReport]:
    reports = []
    for i, snr in enumerate(legit_snrs):
        alt = geometry.altitudes_km[i]
        c_e = total_eavesdrop_capacity(i, geometry, channel, quad)
        reports.append(
            SecrecyReport(
                satellite_id=i,
                legit_snr=float(snr),
                eavesdrop_capacity=c_e,
                secrecy_capacity=secrecy_capacity(
                    float(snr), c_e, channel.bandwidth_hz, legit_term_includes_bandwidth
                ),
                threat_probability=threat_probability(geometry.earth_radius_km, alt),
                half_angle_rad=effective_half_angle(geometry.earth_radius_km, alt),
            )
        )
    return reports


def build_scenario(
    geometry: GeometryConfig,
    channel: ChannelConfig,
    queue: QueueConfig,
    weights: UtilityWeights,
    quad: QuadratureConfig,
    n_devices: int,
    rng: np.random.Generator,
    legit_term_includes_bandwidth: bool = True,
    share_floor: float = 1.0e-6,
) -> Scenario:
    if len(queue.service_rates) != geometry.num_serving:
        raise ValueError(
            f"queue.service_rates has {len(queue.service_rates)} entries for "
            f"{geometry.num_serving} satellites"
        )
    sats = serving_positions(geometry, 0.0)
    sat_positions = np.stack([s.position for s in sats])
    device_positions = sample_device_positions(geometry, n_devices, rng)
    snrs = legitimate_snrs(geometry, channel, sat_positions, device_positions, rng)
    reports = build_reports(geometry, channel, quad, snrs, legit_term_includes_bandwidth)
    return Scenario(
        geometry=geometry,
        channel=channel,
        queue=queue,
        weights=weights,
        n_devices=n_devices,
        sat_positions=sat_positions,
        device_positions=device_positions,
        reports=reports,
        share_floor=share_floor,
    )
