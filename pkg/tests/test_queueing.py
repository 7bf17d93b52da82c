import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sagin_sim.queueing import QueueConfig, arrival_rate, queuing_delay, queuing_delays


class TestArrivalRate:
    def test_zero_share(self):
        assert arrival_rate(0.0, 1000, QueueConfig()) == 0.0

    def test_frozen_value(self):
        cfg = QueueConfig(per_device_task_rate=0.02)
        assert arrival_rate(0.25, 1000, cfg) == pytest.approx(5.0)

    def test_sums_to_total_load(self):
        cfg = QueueConfig(per_device_task_rate=0.02)
        shares = np.array([0.1, 0.2, 0.3, 0.4])
        total = sum(arrival_rate(s, 1000, cfg) for s in shares)
        assert total == pytest.approx(1000 * 0.02)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            arrival_rate(1.5, 10, QueueConfig())
        with pytest.raises(ValueError):
            arrival_rate(0.5, -1, QueueConfig())


class TestQueuingDelay:
    def test_stable_point(self):
        assert queuing_delay(5.0, 10.0, QueueConfig()) == pytest.approx(0.2)

    def test_empty_queue(self):
        assert queuing_delay(0.0, 10.0, QueueConfig()) == pytest.approx(0.1)

    def test_cap_branch(self):
        cfg = QueueConfig(utilization_guard=0.999, overload_delay_cap=1e3)
        assert queuing_delay(9.999, 10.0, cfg) == 1e3

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            queuing_delay(-1.0, 10.0, QueueConfig())
        with pytest.raises(ValueError):
            queuing_delay(1.0, 0.0, QueueConfig())

    @given(st.floats(min_value=0.0, max_value=9.98), st.floats(min_value=0.0, max_value=9.98))
    @settings(max_examples=100, deadline=None)
    def test_strictly_increasing_below_guard(self, a1, a2):
        cfg = QueueConfig()
        lo, hi = sorted((a1, a2))
        d_lo = queuing_delay(lo, 10.0, cfg)
        d_hi = queuing_delay(hi, 10.0, cfg)
        assert d_hi >= d_lo
        if hi > lo + 1e-9:
            assert d_hi > d_lo

    @given(st.floats(min_value=0.0, max_value=100.0))
    @settings(max_examples=100, deadline=None)
    def test_bounded_and_finite(self, arrival):
        cfg = QueueConfig()
        d = queuing_delay(arrival, 10.0, cfg)
        assert 0.0 < d <= cfg.overload_delay_cap
        assert np.isfinite(d)


class TestVectorized:
    def test_matches_scalar(self):
        cfg = QueueConfig(service_rates=(10.0, 20.0, 30.0, 40.0))
        arrivals = np.array([5.0, 19.99, 0.0, 39.999])
        vec = queuing_delays(arrivals, cfg)
        for a, mu, d in zip(arrivals, cfg.service_rates, vec):
            assert d == pytest.approx(queuing_delay(a, mu, cfg))

    def test_overload_entries_capped(self):
        cfg = QueueConfig(service_rates=(10.0, 10.0, 10.0, 10.0))
        vec = queuing_delays(np.array([5.0, 10.0, 15.0, 9.995]), cfg)
        assert vec[1] == cfg.overload_delay_cap
        assert vec[2] == cfg.overload_delay_cap
        assert vec[3] == cfg.overload_delay_cap


class TestConfigValidation:
    @pytest.mark.parametrize("kwargs", [
        {"service_rates": (0.0, 10.0, 10.0, 10.0)},
        {"per_device_task_rate": 0.0},
        {"overload_delay_cap": -1.0},
        {"utilization_guard": 1.0},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            QueueConfig(**kwargs)
