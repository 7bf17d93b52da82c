"""Secure access-selection simulator for satellite-served IoT devices."""

from .channel import ChannelConfig, FadingMode, RicianParams, mean_snr, sample_snr
from .dynamics import (
    GameConfig,
    PopulationState,
    Trajectory,
    UtilityProfile,
    UtilityWeights,
    agent_based_round,
    equilibrium_detected,
    replicator_step,
    run_agent_dynamics,
    run_replicator,
    utility,
    utility_profile,
)
from .geometry import (
    GeometryConfig,
    SatellitePosition,
    distance_pdf,
    effective_half_angle,
    max_los_distance,
    serving_positions,
    threat_probability,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentRecord,
    RiskConfig,
    config_from_dict,
    emit,
    load_config,
    risk_metric,
    run_experiment,
    tiny_oracle,
)
from .queueing import QueueConfig, arrival_rate, queuing_delay
from .scenario import Scenario, build_scenario
from .secrecy import (
    QuadratureConfig,
    QuadratureRule,
    RiskParams,
    SecrecyReport,
    eavesdrop_capacity_at,
    expected_eavesdropper_count,
    monte_carlo_eavesdrop_capacity,
    risk_probability,
    secrecy_capacity,
    total_eavesdrop_capacity,
)
from .strategies import Strategy, StrategyKind, assign, optimal_shares

__version__ = "0.1.0"
