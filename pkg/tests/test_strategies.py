import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sagin_sim.dynamics import PopulationState, UtilityWeights, run_replicator, GameConfig
from sagin_sim.strategies import (
    Strategy,
    StrategyKind,
    assign,
    exhaustive_optimal_counts,
    grid_search_shares,
    optimal_shares,
    project_to_simplex,
    projected_gradient_ascent,
)
from test_dynamics import make_model


def delay_only_objective(service_rates, n_devices, per_device_task_rate):
    mu = np.array(service_rates, dtype=float)

    def objective(x):
        x = np.asarray(x, dtype=float)
        lam = x * n_devices * per_device_task_rate
        stable = lam < 0.999 * mu
        d = np.where(stable, 1.0 / np.where(stable, mu - lam, 1.0), 1e3)
        return -float(x @ d)

    return objective


class TestProjectToSimplex:
    def test_identity_on_simplex(self):
        v = np.array([0.2, 0.3, 0.5])
        assert project_to_simplex(v) == pytest.approx(v)

    def test_clips_negative_mass(self):
        out = project_to_simplex(np.array([1.5, -0.5]))
        assert out == pytest.approx([1.0, 0.0])

    @given(st.lists(st.floats(min_value=-10.0, max_value=10.0), min_size=2, max_size=6))
    @settings(max_examples=200, deadline=None)
    def test_output_on_simplex(self, raw):
        out = project_to_simplex(np.array(raw))
        assert np.all(out >= 0.0)
        assert out.sum() == pytest.approx(1.0, abs=1e-9)

    @given(st.lists(st.floats(min_value=-10.0, max_value=10.0), min_size=2, max_size=6))
    @settings(max_examples=100, deadline=None)
    def test_idempotent(self, raw):
        once = project_to_simplex(np.array(raw))
        twice = project_to_simplex(once)
        assert twice == pytest.approx(once, abs=1e-12)


class TestOptimalShares:
    def test_symmetric_gives_uniform(self):
        obj = delay_only_objective((10.0,) * 4, 100, 0.02)
        state = optimal_shares(obj, 4, 100)
        assert state.shares == pytest.approx([0.25] * 4, abs=1e-3)

    def test_two_queue_equal_rates_even_split(self):
        # with equal service rates the mean-delay minimizer and the
        # equal-delay split coincide at 1/2
        obj = delay_only_objective((10.0, 10.0), 100, 0.1)
        state = optimal_shares(obj, 2, 100)
        assert state.shares[0] == pytest.approx(0.5, abs=1e-3)

    def test_two_queue_against_dense_search(self):
        # asymmetric rates: the minimizer solves mu1/(mu1-l1)^2 = mu2/(mu2-l2)^2,
        # which is not the equal-delay point; check against a dense 1-D oracle
        obj = delay_only_objective((12.0, 8.0), 100, 0.1)
        state = optimal_shares(obj, 2, 100)
        xs = np.linspace(0.0, 1.0, 2_000_001)
        mu1, mu2, a = 12.0, 8.0, 10.0
        with np.errstate(divide="ignore"):
            d1 = np.where(a * xs < 0.999 * mu1, 1.0 / (mu1 - a * xs), 1e3)
            d2 = np.where(a * (1 - xs) < 0.999 * mu2, 1.0 / (mu2 - a * (1 - xs)), 1e3)
        best = xs[np.argmin(xs * d1 + (1 - xs) * d2)]
        assert state.shares[0] == pytest.approx(best, abs=1e-4)

    def test_gradient_and_grid_agree(self):
        obj = delay_only_objective((12.0, 10.0, 8.0), 100, 0.05)
        ascent = projected_gradient_ascent(obj, np.full(3, 1 / 3))
        batch = lambda xs: np.array([obj(x) for x in xs])
        grid, _ = grid_search_shares(batch, 3, 100)
        assert np.all(np.abs(ascent - grid) <= 1.0 / 100 + 1e-9)

    def test_result_dominates_grid(self):
        obj = delay_only_objective((14.0, 10.0, 8.0, 6.0), 200, 0.05)
        batch = lambda xs: np.array([obj(x) for x in xs])
        state = optimal_shares(obj, 4, 200, grid_resolution=40, objective_batch=batch)
        _, grid_best = grid_search_shares(batch, 4, 40)
        assert obj(state.shares) >= grid_best - 1e-12

    def test_rejects_coarse_grid(self):
        with pytest.raises(ValueError):
            optimal_shares(lambda x: 0.0, 2, 10, grid_resolution=5)

    def test_bounds_evolutionary_from_above(self):
        model = make_model([100.0, 60.0], (12.0, 8.0), 0.05)
        weights = UtilityWeights(1e-2, 1.0)
        n = 100

        def objective(x):
            x = np.asarray(x, dtype=float)
            state = PopulationState(shares=project_to_simplex(x), n_devices=n)
            reports, delays = model(state)
            caps = np.array([r.secrecy_capacity for r in reports])
            per = weights.alpha * caps / (np.maximum(state.shares, 1e-6) * n) - delays
            return float(state.shares @ per)

        opt = optimal_shares(objective, 2, n)
        initial = PopulationState(shares=np.array([0.5, 0.5]), n_devices=n)
        traj = run_replicator(initial, model, GameConfig(), weights, record=False)
        assert traj.final_profile.average <= objective(opt.shares) + 1e-9


class TestAssign:
    def test_nearest_picks_overhead_satellite(self):
        sats = np.array([[7000.0, 0, 0], [0, 7000.0, 0], [0, 0, 7000.0]])
        devices = np.array([[0.0, 0.0, 6371.0]])
        kind = StrategyKind(Strategy.NEAREST)
        out = assign(kind, devices, sats, np.random.default_rng(0))
        assert out.tolist() == [2]

    def test_nearest_deterministic(self):
        rng = np.random.default_rng(9)
        devices = rng.normal(size=(50, 3))
        sats = rng.normal(size=(4, 3)) * 10
        kind = StrategyKind(Strategy.NEAREST)
        a = assign(kind, devices, sats, np.random.default_rng(1))
        b = assign(kind, devices, sats, np.random.default_rng(2))
        assert np.array_equal(a, b)

    def test_fixed_all_on_target(self):
        kind = StrategyKind(Strategy.FIXED, fixed_target=0)
        out = assign(kind, np.zeros((100, 3)), np.zeros((4, 3)), np.random.default_rng(0))
        assert np.all(out == 0)
        shares = np.bincount(out, minlength=4) / 100
        assert shares.tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_fixed_target_out_of_range(self):
        kind = StrategyKind(Strategy.FIXED, fixed_target=4)
        with pytest.raises(ValueError):
            assign(kind, np.zeros((10, 3)), np.zeros((4, 3)), np.random.default_rng(0))

    def test_random_concentrates_on_uniform(self):
        kind = StrategyKind(Strategy.RANDOM)
        out = assign(kind, np.zeros((1_000_000, 3)), np.zeros((4, 3)), np.random.default_rng(123))
        shares = np.bincount(out, minlength=4) / 1_000_000
        assert np.all(np.abs(shares - 0.25) < 0.002)

    def test_random_reproducible(self):
        kind = StrategyKind(Strategy.RANDOM)
        a = assign(kind, np.zeros((100, 3)), np.zeros((4, 3)), np.random.default_rng(7))
        b = assign(kind, np.zeros((100, 3)), np.zeros((4, 3)), np.random.default_rng(7))
        assert np.array_equal(a, b)


class TestExhaustiveOracle:
    def test_matches_relaxed_on_symmetric_even_split(self):
        obj = delay_only_objective((10.0, 10.0), 10, 0.1)
        counts, val = exhaustive_optimal_counts(obj, 10, 2)
        assert sorted(counts) == [5, 5]

    def test_size_limits(self):
        with pytest.raises(ValueError):
            exhaustive_optimal_counts(lambda x: 0.0, 13, 2)
        with pytest.raises(ValueError):
            exhaustive_optimal_counts(lambda x: 0.0, 10, 4)
