"""M/M/1 sojourn-time delay with explicit overload semantics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QueueConfig:
    service_rates: tuple[float, ...] = (25.0, 25.0, 25.0, 25.0)  # tasks/s per satellite
    per_device_task_rate: float = 0.02  # tasks/s
    overload_delay_cap: float = 1.0e3  # s
    utilization_guard: float = 0.999

    def __post_init__(self):
        object.__setattr__(self, "service_rates", tuple(float(m) for m in self.service_rates))
        if any(m <= 0 for m in self.service_rates):
            raise ValueError("all service_rates must be > 0")
        if self.per_device_task_rate <= 0:
            raise ValueError("per_device_task_rate must be > 0")
        if self.overload_delay_cap <= 0:
            raise ValueError("overload_delay_cap must be > 0")
        if not 0.0 < self.utilization_guard < 1.0:
            raise ValueError("utilization_guard must be in (0, 1)")


def arrival_rate(share: float, n_devices: int, config: QueueConfig) -> float:
    """Task arrival rate at one satellite: share of the population times per-device rate."""
    if not 0.0 <= share <= 1.0 + 1e-12:
        raise ValueError("share must be in [0, 1]")
    if n_devices < 0:
        raise ValueError("n_devices must be >= 0")
    return share * n_devices * config.per_device_task_rate


def queuing_delay(arrival: float, service: float, config: QueueConfig) -> float:
    """1/(mu - lambda) on the stable region, overload_delay_cap past the guard.

    Overload is a defined value, never an error: a saturated satellite gets a
    finite but huge delay and sheds load through the game dynamics.
    """
    if arrival < 0:
        raise ValueError("arrival must be >= 0")
    if service <= 0:
        raise ValueError("service must be > 0")
    if arrival < config.utilization_guard * service:
        return 1.0 / (service - arrival)
    return config.overload_delay_cap


def queuing_delays(arrivals: np.ndarray, config: QueueConfig) -> np.ndarray:
    """Vectorized per-satellite delays for an arrival-rate vector."""
    mu = np.asarray(config.service_rates, dtype=float)
    lam = np.asarray(arrivals, dtype=float)
    stable = lam < config.utilization_guard * mu
    with np.errstate(divide="ignore"):
        d = np.where(stable, 1.0 / np.where(stable, mu - lam, 1.0), config.overload_delay_cap)
    return d
