"""Distance-to-SNR channel model: deterministic path loss with an optional
shadowed-Rician fading mode (unit-mean channel power)."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ChannelError(ValueError):
    """Invalid channel configuration or argument."""


class FadingMode(str, enum.Enum):
    MEAN_ONLY = "mean_only"
    SHADOWED_RICIAN = "shadowed_rician"


@dataclass(frozen=True)
class RicianParams:
    """Shadowed-Rician triple: scattered power b, Nakagami severity m, LOS power omega.

    Defaults are the widely used "average shadowing" tabulation.
    """

    b: float = 0.126
    m: float = 10.1
    omega: float = 0.835

    def __post_init__(self):
        if self.b <= 0 or self.m <= 0 or self.omega <= 0:
            raise ChannelError("rician params b, m, omega must all be > 0")


@dataclass(frozen=True)
class ChannelConfig:
    bandwidth_hz: float = 1.0e6
    reference_snr: float = 1.0e4
    reference_distance_km: float = 300.0
    path_loss_exponent: float = 2.0
    fading_mode: FadingMode = FadingMode.MEAN_ONLY
    rician: RicianParams = field(default_factory=RicianParams)
    rng_seed: int = 0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ChannelError("bandwidth_hz must be > 0")
        if self.reference_snr <= 0:
            raise ChannelError("reference_snr must be > 0")
        if self.reference_distance_km <= 0:
            raise ChannelError("reference_distance_km must be > 0")
        if self.path_loss_exponent < 2:
            raise ChannelError("path_loss_exponent must be >= 2")
        if not isinstance(self.fading_mode, FadingMode):
            object.__setattr__(self, "fading_mode", FadingMode(self.fading_mode))


def mean_snr(d_km, config: ChannelConfig):
    """Path-loss SNR: reference_snr * (d_ref/d)^exponent.  Accepts scalars or arrays."""
    d = np.asarray(d_km, dtype=float)
    if np.any(d <= 0):
        raise ChannelError("distance must be > 0")
    snr = config.reference_snr * (config.reference_distance_km / d) ** config.path_loss_exponent
    if np.isscalar(d_km) or getattr(d_km, "ndim", 1) == 0:
        return float(snr)
    return snr


def sample_channel_power(config: ChannelConfig, rng: np.random.Generator, size=None):
    """Unit-mean shadowed-Rician channel power gains.

    Scattered component ~ CN(0, 2b); LOS power ~ Gamma(m, omega/m)
    (Nakagami-m shadowing); the sum power is normalized by its mean 2b + omega.
    """
    p = config.rician
    n = 1 if size is None else size
    los_power = rng.gamma(shape=p.m, scale=p.omega / p.m, size=n)
    phase = rng.uniform(0.0, 2.0 * math.pi, size=n)
    scat_re = rng.normal(0.0, math.sqrt(p.b), size=n)
    scat_im = rng.normal(0.0, math.sqrt(p.b), size=n)
    amp_re = scat_re + np.sqrt(los_power) * np.cos(phase)
    amp_im = scat_im + np.sqrt(los_power) * np.sin(phase)
    power = (amp_re**2 + amp_im**2) / (2.0 * p.b + p.omega)
    if size is None:
        return float(power[0])
    return power


def sample_snr(d_km, config: ChannelConfig, rng: np.random.Generator):
    """Fading SNR sample: mean_snr scaled by a unit-mean shadowed-Rician power gain.

    Deterministic given the generator state and call sequence.
    """
    if config.fading_mode is not FadingMode.SHADOWED_RICIAN:
        raise ChannelError("sample_snr requires fading_mode=shadowed_rician")
    base = mean_snr(d_km, config)
    if np.isscalar(base):
        return base * sample_channel_power(config, rng)
    return base * sample_channel_power(config, rng, size=base.shape[0])
