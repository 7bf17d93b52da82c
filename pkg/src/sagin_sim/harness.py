"""Experiment harness: strict config loading, deterministic strategy x
population-size sweeps, risk/delay/utility metrics, and CSV / JSON-lines
emission."""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import ChannelConfig, FadingMode, RicianParams
from .dynamics import GameConfig, PopulationState, UtilityWeights, run_replicator, utility_profile
from .geometry import GeometryConfig
from .queueing import QueueConfig
from .scenario import Scenario, build_scenario
from .secrecy import QuadratureConfig, SecrecyReport
from .strategies import STRATEGY_CODES, Strategy, StrategyKind, assign, optimal_shares

SEED_ENV_VAR = "SAGIN_SIM_SEED"

# namespace tags for seed derivation; the scheme is splittable by construction
# so adding strategies or replications never perturbs other arms.
_SEED_SCENARIO = 101
_SEED_DEMANDS = 102
_SEED_STRATEGY = 103

CSV_HEADER = (
    "strategy,n_devices,replication,round,avg_utility,normalized_utility,"
    "mean_risk_probability,mean_queuing_delay,converged,shares"
)


class ConfigError(ValueError):
    """Configuration file or invariant failure; message names the offending key."""


@dataclass(frozen=True)
class RiskConfig:
    """Per-device secrecy-demand distribution and risk steepness."""

    demand_min: float = 0.0
    demand_max: float = 6.0e4
    risk_exponent: float = 5.0e-5

    def __post_init__(self):
        if self.demand_min < 0 or self.demand_max < self.demand_min:
            raise ConfigError("risk demand bounds need 0 <= demand_min <= demand_max")
        if self.risk_exponent <= 0:
            raise ConfigError("risk.risk_exponent must be > 0")


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    queue: QueueConfig = field(default_factory=QueueConfig)
    weights: UtilityWeights = field(default_factory=lambda: UtilityWeights(alpha=3.0e-5, beta=1.0))
    game: GameConfig = field(default_factory=GameConfig)
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    risk: RiskConfig = field(default_factory=RiskConfig)
    population_sizes: tuple[int, ...] = tuple(range(100, 1001, 100))
    strategies: tuple[StrategyKind, ...] = tuple(StrategyKind(k) for k in Strategy)
    replications: int = 3
    grid_resolution: int = 100
    legit_term_includes_bandwidth: bool = True
    output_path: str = "results/sweep.csv"
    master_seed: int = 20260823

    def __post_init__(self):
        object.__setattr__(self, "population_sizes", tuple(int(n) for n in self.population_sizes))
        if not self.population_sizes:
            raise ConfigError("population_sizes must be non-empty")
        m = self.geometry.num_serving
        for n in self.population_sizes:
            if n < m:
                raise ConfigError(f"population_sizes entry {n} below satellite count {m}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if len(self.queue.service_rates) != m:
            raise ConfigError(
                f"queue.service_rates needs {m} entries, got {len(self.queue.service_rates)}"
            )
        for kind in self.strategies:
            if kind.kind is Strategy.FIXED and kind.fixed_target >= m:
                raise ConfigError(f"strategies: fixed_target {kind.fixed_target} out of range")


@dataclass(frozen=True)
class ExperimentRecord:
    strategy: str
    n_devices: int
    replication: int
    round: int
    avg_utility: float
    normalized_utility: float
    mean_risk_probability: float
    mean_queuing_delay: float
    converged: bool
    shares: tuple[float, ...]


def _reject_unknown(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _build(cls, section: dict, where: str, transforms: dict | None = None):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a mapping")
    names = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    _reject_unknown(section, names, where)
    kwargs = dict(section)
    for key, fn in (transforms or {}).items():
        if key in kwargs:
            kwargs[key] = fn(kwargs[key])
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_strategy(entry, where: str) -> StrategyKind:
    if isinstance(entry, str):
        try:
            return StrategyKind(Strategy(entry))
        except ValueError as exc:
            raise ConfigError(f"{where}: unknown strategy {entry!r}") from exc
    if isinstance(entry, dict):
        return _build(StrategyKind, entry, where, transforms={"kind": Strategy})
    raise ConfigError(f"{where}: strategy entries must be names or mappings")


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and fully validate an experiment config file (JSON, strict keys).

    Every section falls back to its defaults; unknown keys anywhere are
    rejected with the offending key named.  SAGIN_SIM_SEED in the environment
    overrides master_seed.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a mapping")
    top_allowed = {
        "geometry",
        "channel",
        "queue",
        "weights",
        "game",
        "quad",
        "risk",
        "population_sizes",
        "strategies",
        "replications",
        "grid_resolution",
        "legit_term_includes_bandwidth",
        "output_path",
        "master_seed",
    }
    _reject_unknown(raw, top_allowed, "config")

    geometry = _build(GeometryConfig, raw.get("geometry", {}), "geometry")
    channel = _build(
        ChannelConfig,
        raw.get("channel", {}),
        "channel",
        transforms={
            "fading_mode": FadingMode,
            "rician": lambda d: _build(RicianParams, d, "channel.rician"),
        },
    )
    queue_section = dict(raw.get("queue", {}))
    if "service_rates" not in queue_section:
        queue_section["service_rates"] = [25.0] * geometry.num_serving
    queue = _build(QueueConfig, queue_section, "queue")
    weights = (
        _build(UtilityWeights, raw["weights"], "weights")
        if "weights" in raw
        else UtilityWeights(alpha=3.0e-5, beta=1.0)
    )
    game = _build(GameConfig, raw.get("game", {}), "game")
    quad = _build(QuadratureConfig, raw.get("quad", {}), "quad")
    risk = _build(RiskConfig, raw.get("risk", {}), "risk")

    strategies_raw = raw.get("strategies")
    if strategies_raw is None:
        strategies = tuple(StrategyKind(k) for k in Strategy)
    else:
        if not isinstance(strategies_raw, list) or not strategies_raw:
            raise ConfigError("strategies must be a non-empty list")
        strategies = tuple(_parse_strategy(e, "strategies") for e in strategies_raw)

    kwargs = {
        k: raw[k]
        for k in (
            "population_sizes",
            "replications",
            "grid_resolution",
            "legit_term_includes_bandwidth",
            "output_path",
            "master_seed",
        )
        if k in raw
    }
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            kwargs["master_seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from exc
    try:
        return ExperimentConfig(
            geometry=geometry,
            channel=channel,
            queue=queue,
            weights=weights,
            game=game,
            quad=quad,
            risk=risk,
            strategies=strategies,
            **kwargs,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _rng(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(tuple(int(e) for e in entropy)))


def draw_demands(risk: RiskConfig, n_devices: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(risk.demand_min, risk.demand_max, size=n_devices)


def risk_metric(
    reports: list[SecrecyReport],
    risk: RiskConfig,
    *,
    n_devices: int,
    shares: np.ndarray | None = None,
    assignments: np.ndarray | None = None,
    demands: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    share_floor: float = 1.0e-6,
) -> float:
    """Mean per-device shortfall risk against each device's satellite.

    Device demands are drawn from the configured uniform range (or passed in
    for paired comparisons across strategies); each device's capacity is its
    satellite's secrecy capacity split over that satellite's population share.
    """
    caps = np.array([r.secrecy_capacity for r in reports])
    m = len(caps)
    if assignments is not None:
        assignments = np.asarray(assignments, dtype=int)
        counts = np.bincount(assignments, minlength=m)
        shares = counts / len(assignments)
        n_devices = len(assignments)
    elif shares is not None:
        shares = np.asarray(shares, dtype=float)
        assignments = _shares_to_assignments(shares, n_devices)
    else:
        raise ValueError("risk_metric needs shares or assignments")
    if demands is None:
        if rng is None:
            raise ValueError("risk_metric needs demands or an rng to draw them")
        demands = draw_demands(risk, n_devices, rng)
    per_device_cap = caps / (np.maximum(shares, share_floor) * n_devices)
    c = per_device_cap[assignments]
    short = demands > c
    risks = np.where(short, 1.0 - np.exp(-risk.risk_exponent * np.maximum(demands - c, 0.0)), 0.0)
    return float(np.mean(risks))


def _shares_to_assignments(shares: np.ndarray, n_devices: int) -> np.ndarray:
    """Largest-remainder integer allocation of n_devices across the shares."""
    exact = shares * n_devices
    counts = np.floor(exact).astype(int)
    remainder = n_devices - counts.sum()
    if remainder > 0:
        order = np.argsort(-(exact - counts), kind="stable")
        counts[order[:remainder]] += 1
    return np.repeat(np.arange(len(shares)), counts)


@dataclass
class _ArmResult:
    shares: np.ndarray
    converged: bool
    rounds: int
    trace: list[dict] | None = None


def _run_arm(
    kind: StrategyKind,
    scenario: Scenario,
    config: ExperimentConfig,
    n: int,
    rep: int,
    trace: bool,
) -> _ArmResult:
    m = scenario.num_satellites
    if kind.kind is Strategy.OPTIMAL:
        state = optimal_shares(
            scenario.average_utility,
            m,
            n,
            config.grid_resolution,
            scenario.average_utility_batch,
        )
        return _ArmResult(shares=state.shares, converged=True, rounds=0)
    if kind.kind is Strategy.EVOLUTIONARY:
        initial = PopulationState(shares=np.full(m, 1.0 / m), n_devices=n)
        traj = run_replicator(initial, scenario, config.game, config.weights, record=trace)
        rows = None
        if trace:
            rows = [
                {
                    "strategy": kind.name,
                    "n_devices": n,
                    "replication": rep,
                    "round": i,
                    "shares": [float(s) for s in st.shares],
                    "avg_utility": prof.average,
                }
                for i, (st, prof) in enumerate(zip(traj.states, traj.profiles))
            ]
        return _ArmResult(
            shares=traj.final_state.shares,
            converged=traj.converged,
            rounds=traj.rounds,
            trace=rows,
        )
    rng = _rng(config.master_seed, _SEED_STRATEGY, STRATEGY_CODES[kind.kind], n, rep, kind.rng_seed)
    assignments = assign(kind, scenario.device_positions, scenario.sat_positions, rng)
    shares = np.bincount(assignments, minlength=m) / n
    return _ArmResult(shares=shares, converged=True, rounds=0)


def _run_cell(
    config: ExperimentConfig, n: int, rep: int, trace: bool
) -> tuple[list[ExperimentRecord], list[dict]]:
    scenario = build_scenario(
        config.geometry,
        config.channel,
        config.queue,
        config.weights,
        config.quad,
        n,
        _rng(config.master_seed, _SEED_SCENARIO, n, rep),
        config.legit_term_includes_bandwidth,
        config.game.min_share_floor,
    )
    demands = draw_demands(config.risk, n, _rng(config.master_seed, _SEED_DEMANDS, n, rep))

    # the optimal arm always runs: it anchors the normalization
    optimal_kind = StrategyKind(Strategy.OPTIMAL)
    arm_results: dict[str, _ArmResult] = {
        optimal_kind.name: _run_arm(optimal_kind, scenario, config, n, rep, False)
    }
    for kind in config.strategies:
        if kind.name not in arm_results:
            arm_results[kind.name] = _run_arm(kind, scenario, config, n, rep, trace)
    opt_utility = scenario.average_utility(arm_results[optimal_kind.name].shares)

    records = []
    traces: list[dict] = []
    for kind in config.strategies:
        result = arm_results[kind.name]
        shares = result.shares
        state = PopulationState(shares=shares, n_devices=n)
        delays = scenario.delays(shares)
        profile = utility_profile(
            state, scenario.reports, delays, config.weights, config.game.min_share_floor
        )
        risk = risk_metric(
            scenario.reports,
            config.risk,
            n_devices=n,
            shares=shares,
            demands=demands,
            share_floor=config.game.min_share_floor,
        )
        records.append(
            ExperimentRecord(
                strategy=kind.name,
                n_devices=n,
                replication=rep,
                round=result.rounds,
                avg_utility=profile.average,
                normalized_utility=profile.average / opt_utility,
                mean_risk_probability=risk,
                mean_queuing_delay=float(shares @ delays),
                converged=result.converged,
                shares=tuple(float(s) for s in shares),
            )
        )
        if trace and result.trace:
            traces.extend(result.trace)
    return records, traces


def run_experiment(
    config: ExperimentConfig, parallel: int = 1, trace: bool = False
) -> tuple[list[ExperimentRecord], list[dict]]:
    """Run every (strategy, N, replication) cell; deterministic for a fixed seed.

    Cells are independent; with parallel > 1 they run in worker processes and
    are merged in a fixed order so the output never depends on scheduling.
    """
    cells = [(n, rep) for n in config.population_sizes for rep in range(config.replications)]
    results: list[tuple[list[ExperimentRecord], list[dict]]] = []
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(_run_cell, config, n, rep, trace) for n, rep in cells]
            results = [f.result() for f in futures]
    else:
        results = [_run_cell(config, n, rep, trace) for n, rep in cells]
    records: list[ExperimentRecord] = []
    traces: list[dict] = []
    for recs, trs in results:
        records.extend(recs)
        traces.extend(trs)
    records.sort(key=lambda r: (r.strategy, r.n_devices, r.replication))
    return records, traces


def tiny_oracle(config: ExperimentConfig, n_devices: int, m: int, rep: int = 0) -> dict:
    """Exhaustive integer-assignment optimum vs relaxed optimum vs evolutionary.

    Builds a reduced scenario with m satellites on evenly spaced phases and
    service rates sized to the tiny population so load still matters.
    """
    from .dynamics import run_replicator
    from .strategies import exhaustive_optimal_counts

    if n_devices > 12 or m > 3:
        raise ConfigError("tiny oracle limited to n_devices <= 12 and m <= 3")
    phases = tuple(360.0 * i / m for i in range(m))
    altitude = config.geometry.altitudes_km[0]
    geometry = replace(
        config.geometry,
        num_serving=m,
        serving_phases_deg=phases,
        serving_altitude_km=altitude,
    )
    total_arrival = n_devices * config.queue.per_device_task_rate
    rates = tuple(total_arrival * (1.2 - 0.3 * i) for i in range(m))
    queue = replace(config.queue, service_rates=rates)
    scenario = build_scenario(
        geometry,
        config.channel,
        queue,
        config.weights,
        config.quad,
        n_devices,
        _rng(config.master_seed, _SEED_SCENARIO, n_devices, rep),
        config.legit_term_includes_bandwidth,
        config.game.min_share_floor,
    )
    counts, exhaustive_val = exhaustive_optimal_counts(scenario.average_utility, n_devices, m)
    relaxed = optimal_shares(
        scenario.average_utility, m, n_devices, config.grid_resolution,
        scenario.average_utility_batch,
    )
    relaxed_val = scenario.average_utility(relaxed.shares)
    initial = PopulationState(shares=np.full(m, 1.0 / m), n_devices=n_devices)
    traj = run_replicator(initial, scenario, config.game, config.weights, record=False)
    evo_val = traj.final_profile.average
    per = traj.final_profile.per_satellite
    relaxed_state = PopulationState(shares=relaxed.shares, n_devices=n_devices)
    relaxed_profile = utility_profile(
        relaxed_state,
        scenario.reports,
        scenario.delays(relaxed.shares),
        config.weights,
        config.game.min_share_floor,
    )
    spread = float(relaxed_profile.per_satellite.max() - relaxed_profile.per_satellite.min())
    return {
        "exhaustive_counts": counts,
        "exhaustive_utility": exhaustive_val,
        "relaxed_shares": [float(s) for s in relaxed.shares],
        "relaxed_utility": relaxed_val,
        "evolutionary_utility": evo_val,
        "evolutionary_converged": traj.converged,
        "granularity_bound": spread / n_devices,
    }


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def emit(records: list[ExperimentRecord], path: str | Path, fmt: str = "csv") -> None:
    """Write records sorted by (strategy, n_devices, replication).

    CSV uses the fixed header, 9-significant-digit floats, and
    semicolon-joined shares; jsonl mirrors the field names.
    """
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown output format {fmt!r}")
    rows = sorted(records, key=lambda r: (r.strategy, r.n_devices, r.replication))
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            if fmt == "csv":
                fh.write(CSV_HEADER + "\n")
                for r in rows:
                    fh.write(
                        ",".join(
                            [
                                r.strategy,
                                str(r.n_devices),
                                str(r.replication),
                                str(r.round),
                                _fmt(r.avg_utility),
                                _fmt(r.normalized_utility),
                                _fmt(r.mean_risk_probability),
                                _fmt(r.mean_queuing_delay),
                                "true" if r.converged else "false",
                                ";".join(_fmt(s) for s in r.shares),
                            ]
                        )
                        + "\n"
                    )
            else:
                for r in rows:
                    fh.write(
                        json.dumps(
                            {
                                "strategy": r.strategy,
                                "n_devices": r.n_devices,
                                "replication": r.replication,
                                "round": r.round,
                                "avg_utility": r.avg_utility,
                                "normalized_utility": r.normalized_utility,
                                "mean_risk_probability": r.mean_risk_probability,
                                "mean_queuing_delay": r.mean_queuing_delay,
                                "converged": r.converged,
                                "shares": list(r.shares),
                            }
                        )
                        + "\n"
                    )
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
