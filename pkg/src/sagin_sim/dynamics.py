"""Evolutionary game core: device utilities, replicator dynamics, equilibrium
detection, and the distributed per-device revision protocol.

A *model* is a closure ``state -> (reports, delays)`` giving each satellite's
secrecy report and current queuing delay for the population state; utilities
are recomputed from it every step.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .secrecy import SecrecyReport

ModelFn = Callable[["PopulationState"], tuple[Sequence[SecrecyReport], np.ndarray]]

SIMPLEX_ATOL = 1e-9


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class PopulationState:
    """Point on the strategy simplex plus the population size."""

    shares: np.ndarray
    n_devices: int
    round: int = 0

    def __post_init__(self):
        shares = np.asarray(self.shares, dtype=float)
        object.__setattr__(self, "shares", shares)
        if shares.ndim != 1:
            raise GameError("shares must be a vector")
        if np.any(shares < -SIMPLEX_ATOL) or np.any(shares > 1.0 + SIMPLEX_ATOL):
            raise GameError("each share must be in [0, 1]")
        if abs(shares.sum() - 1.0) > SIMPLEX_ATOL:
            raise GameError(f"shares must sum to 1, got {shares.sum()!r}")
        if self.n_devices < 0:
            raise GameError("n_devices must be >= 0")


@dataclass(frozen=True)
class UtilityWeights:
    alpha: float = 1.0  # secrecy weight
    beta: float = 1.0  # delay weight

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise GameError("weights must be >= 0")
        if self.alpha == 0 and self.beta == 0:
            raise GameError("weights cannot both be zero")


@dataclass(frozen=True)
class GameConfig:
    learning_rate: float = 5.0  # sigma
    time_step: float = 0.01  # Euler step
    max_rounds: int = 60_000
    equilibrium_tolerance: float = 1.0e-4
    min_share_floor: float = 1.0e-6
    move_probability: float = 0.1
    migration_mode: str = "surplus"  # or "uniform" over above-average satellites
    rng_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise GameError("learning_rate must be > 0")
        if self.time_step <= 0:
            raise GameError("time_step must be > 0")
        if self.equilibrium_tolerance <= 0:
            raise GameError("equilibrium_tolerance must be > 0")
        if not 0.0 < self.move_probability <= 1.0:
            raise GameError("move_probability must be in (0, 1]")
        if self.min_share_floor < 0:
            raise GameError("min_share_floor must be >= 0")
        if self.migration_mode not in ("surplus", "uniform"):
            raise GameError("migration_mode must be 'surplus' or 'uniform'")


@dataclass(frozen=True)
class UtilityProfile:
    per_satellite: np.ndarray
    average: float

    def __post_init__(self):
        object.__setattr__(self, "per_satellite", np.asarray(self.per_satellite, dtype=float))


def utility(
    sat: int,
    state: PopulationState,
    secrecy: SecrecyReport,
    delay: float,
    weights: UtilityWeights,
    share_floor: float = 1.0e-6,
) -> float:
    """Per-device payoff: secrecy capacity split over the satellite's users minus delay.

    The share is floored so probing an (almost) empty satellite never divides
    by zero; the floor approximates a lone prospective occupant.
    """
    x = max(state.shares[sat], share_floor)
    return weights.alpha * secrecy.secrecy_capacity / (x * state.n_devices) - weights.beta * delay


def utility_profile(
    state: PopulationState,
    reports: Sequence[SecrecyReport],
    delays: np.ndarray,
    weights: UtilityWeights,
    share_floor: float = 1.0e-6,
) -> UtilityProfile:
    """All per-satellite utilities plus the share-weighted system average."""
    m = len(state.shares)
    if len(reports) != m or len(delays) != m:
        raise GameError(f"expected {m} reports and delays, got {len(reports)}/{len(delays)}")
    caps = np.array([r.secrecy_capacity for r in reports])
    x = np.maximum(state.shares, share_floor)
    per = weights.alpha * caps / (x * state.n_devices) - weights.beta * np.asarray(delays, dtype=float)
    return UtilityProfile(per_satellite=per, average=float(state.shares @ per))


def replicator_step(
    state: PopulationState, profile: UtilityProfile, config: GameConfig
) -> PopulationState:
    """One Euler step of x_i += dt*sigma*x_i*(pi_i - avg), floored and renormalized."""
    x = state.shares
    raw = x + config.time_step * config.learning_rate * x * (
        profile.per_satellite - profile.average
    )
    floored = np.maximum(raw, config.min_share_floor)
    return PopulationState(
        shares=floored / floored.sum(), n_devices=state.n_devices, round=state.round + 1
    )


def equilibrium_detected(
    profile: UtilityProfile, config: GameConfig, shares: np.ndarray | None = None
) -> bool:
    """True when every supported strategy's utility sits at the system average.

    Strategies at the extinction floor are excluded: their deviation cannot be
    closed by the dynamics and does not affect any occupied device.
    """
    dev = np.abs(profile.per_satellite - profile.average)
    if shares is not None:
        supported = np.asarray(shares) > config.min_share_floor
        if not np.any(supported):
            return True
        dev = dev[supported]
    return float(dev.max()) <= config.equilibrium_tolerance * max(1.0, abs(profile.average))


@dataclass
class Trajectory:
    states: list[PopulationState]
    profiles: list[UtilityProfile]
    converged: bool
    rounds: int

    @property
    def final_state(self) -> PopulationState:
        return self.states[-1]

    @property
    def final_profile(self) -> UtilityProfile:
        return self.profiles[-1]


def run_replicator(
    initial: PopulationState,
    model: ModelFn,
    config: GameConfig,
    weights: UtilityWeights,
    record: bool = True,
) -> Trajectory:
    """Iterate replicator steps, recomputing utilities from the model each step.

    Stops at equilibrium or max_rounds; non-convergence is flagged, not raised.
    With record=False only the final (state, profile) pair is kept.
    """
    state = initial
    states: list[PopulationState] = []
    profiles: list[UtilityProfile] = []
    converged = False
    rounds = 0
    while True:
        reports, delays = model(state)
        profile = utility_profile(state, reports, delays, weights, config.min_share_floor)
        if record:
            states.append(state)
            profiles.append(profile)
        if equilibrium_detected(profile, config, state.shares):
            converged = True
            break
        if rounds >= config.max_rounds:
            break
        state = replicator_step(state, profile, config)
        rounds += 1
    if not record:
        states = [state]
        profiles = [profile]
    return Trajectory(states=states, profiles=profiles, converged=converged, rounds=rounds)


def agent_based_round(
    assignments: np.ndarray,
    model: ModelFn,
    config: GameConfig,
    rng: np.random.Generator,
    weights: UtilityWeights,
) -> tuple[np.ndarray, UtilityProfile]:
    """One timeslot of the distributed revision protocol.

    Satellites broadcast their connection counts; each device scores its own
    satellite against the system average and, when below it, migrates with
    probability move_probability to a satellite drawn proportionally to the
    positive utility surplus (or uniformly over above-average satellites).
    """
    assignments = np.asarray(assignments)
    n = len(assignments)
    counts = np.bincount(assignments, minlength=_num_strategies(model, assignments))
    m = len(counts)
    state = PopulationState(shares=counts / n, n_devices=n)
    reports, delays = model(state)
    profile = utility_profile(state, reports, delays, weights, config.min_share_floor)

    per = profile.per_satellite
    avg = profile.average
    below = per[assignments] < avg
    movers = below & (rng.random(n) < config.move_probability)
    new_assignments = assignments.copy()
    n_movers = int(movers.sum())
    if n_movers > 0:
        surplus = np.maximum(0.0, per - avg)
        if surplus.sum() > 0.0:
            if config.migration_mode == "surplus":
                weights_vec = surplus / surplus.sum()
            else:
                above = (surplus > 0.0).astype(float)
                weights_vec = above / above.sum()
            new_assignments[movers] = rng.choice(m, size=n_movers, p=weights_vec)
    return new_assignments, profile


def _num_strategies(model: ModelFn, assignments: np.ndarray) -> int:
    m = getattr(model, "num_satellites", None)
    if m is not None:
        return int(m)
    return int(assignments.max()) + 1


@dataclass
class AgentRun:
    assignments: np.ndarray
    shares: np.ndarray  # tail-averaged empirical shares
    converged: bool
    rounds: int
    final_profile: UtilityProfile


def run_agent_dynamics(
    initial_assignments: np.ndarray,
    model: ModelFn,
    config: GameConfig,
    rng: np.random.Generator,
    weights: UtilityWeights,
    tail_window: int = 50,
) -> AgentRun:
    """Iterate agent_based_round to (stochastic) convergence.

    Convergence uses the same utility-spread test as the mean-field path; the
    reported shares average the trailing window to damp migration noise.
    """
    assignments = np.asarray(initial_assignments).copy()
    n = len(assignments)
    tail: list[np.ndarray] = []
    converged = False
    profile = None
    rounds = 0
    for t in range(config.max_rounds):
        assignments, profile = agent_based_round(assignments, model, config, rng, weights)
        rounds = t + 1
        counts = np.bincount(assignments, minlength=len(profile.per_satellite))
        tail.append(counts / n)
        if len(tail) > tail_window:
            tail.pop(0)
        shares = counts / n
        if equilibrium_detected(profile, config, shares) and len(tail) == tail_window:
            converged = True
            break
    mean_shares = np.mean(tail, axis=0) if tail else np.bincount(assignments) / n
    return AgentRun(
        assignments=assignments,
        shares=mean_shares,
        converged=converged,
        rounds=rounds,
        final_profile=profile,
    )
