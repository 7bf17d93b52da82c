import pathlib

import numpy as np
import pytest

from sagin_sim.harness import config_from_dict, load_config, _rng, _SEED_SCENARIO
from sagin_sim.scenario import build_scenario

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent


@pytest.fixture
def default_config():
    return config_from_dict({})


@pytest.fixture
def benchmark_config():
    return load_config(REPO_ROOT / "configs" / "benchmark.json")


@pytest.fixture
def make_scenario(default_config):
    """Factory for the symmetric default scenario at a given population size."""

    def _make(n_devices, rep=0, config=None):
        cfg = config or default_config
        return build_scenario(
            cfg.geometry,
            cfg.channel,
            cfg.queue,
            cfg.weights,
            cfg.quad,
            n_devices,
            _rng(cfg.master_seed, _SEED_SCENARIO, n_devices, rep),
            cfg.legit_term_includes_bandwidth,
            cfg.game.min_share_floor,
        )

    return _make
