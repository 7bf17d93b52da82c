"""Benchmark selection strategies and the optimizers backing the `optimal` arm:
projected gradient ascent on the simplex cross-checked by lattice grid search,
plus a tiny-population exhaustive oracle for tests."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import PopulationState


class Strategy(str, enum.Enum):
    EVOLUTIONARY = "evolutionary"
    OPTIMAL = "optimal"
    RANDOM = "random"
    NEAREST = "nearest"
    FIXED = "fixed"


#: stable integers used in seed derivation; append-only so adding a strategy
#: never perturbs existing arms.
STRATEGY_CODES = {
    Strategy.OPTIMAL: 0,
    Strategy.EVOLUTIONARY: 1,
    Strategy.RANDOM: 2,
    Strategy.NEAREST: 3,
    Strategy.FIXED: 4,
}


@dataclass(frozen=True)
class StrategyKind:
    kind: Strategy
    fixed_target: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.kind, Strategy):
            object.__setattr__(self, "kind", Strategy(self.kind))
        if self.fixed_target < 0:
            raise ValueError("fixed_target must be >= 0")

    @property
    def name(self) -> str:
        return self.kind.value


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(v) + 1)
    cond = u + (1.0 - css) / idx > 0
    rho = idx[cond][-1]
    lam = (1.0 - css[rho - 1]) / rho
    return np.maximum(v + lam, 0.0)


def _numeric_gradient(objective: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-7):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (objective(x + e) - objective(x - e)) / (2.0 * h)
    return g


def projected_gradient_ascent(
    objective: Callable[[np.ndarray], float],
    x0: np.ndarray,
    max_iters: int = 500,
    initial_step: float = 0.1,
    tol: float = 1e-10,
) -> np.ndarray:
    """Maximize a concave-ish objective on the simplex with backtracking steps."""
    x = project_to_simplex(np.asarray(x0, dtype=float))
    fx = objective(x)
    step = initial_step
    for _ in range(max_iters):
        g = _numeric_gradient(objective, x)
        improved = False
        s = step
        for _ in range(30):
            cand = project_to_simplex(x + s * g)
            fc = objective(cand)
            if fc > fx + tol:
                x, fx = cand, fc
                step = min(s * 2.0, 1e6)
                improved = True
                break
            s *= 0.5
        if not improved:
            break
    return x


def _compositions(total: int, parts: int):
    """Integer compositions of `total` into `parts` non-negative parts."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def grid_search_shares(
    objective_batch: Callable[[np.ndarray], np.ndarray], m: int, resolution: int
) -> tuple[np.ndarray, float]:
    """Best simplex-lattice point by batched objective evaluation.

    Ties resolve to the lexicographically largest share vector so the reduction
    is deterministic regardless of evaluation order.
    """
    lattice = np.array(list(_compositions(resolution, m)), dtype=float) / resolution
    values = np.asarray(objective_batch(lattice), dtype=float)
    best = np.max(values)
    candidates = lattice[values >= best - 0.0]
    order = np.lexsort(candidates.T[::-1])
    return candidates[order[-1]], float(best)


def optimal_shares(
    objective: Callable[[np.ndarray], float],
    m: int,
    n_devices: int,
    grid_resolution: int = 100,
    objective_batch: Callable[[np.ndarray], np.ndarray] | None = None,
) -> PopulationState:
    """Maximize system average utility over the simplex.

    Projected gradient ascent from the uniform point, cross-checked against a
    lattice grid search (m <= 4 only; the lattice explodes combinatorially
    above that); the better point wins, then a final ascent polish runs from it.
    """
    if grid_resolution < 10:
        raise ValueError("grid_resolution must be >= 10")
    uniform = np.full(m, 1.0 / m)
    best = projected_gradient_ascent(objective, uniform)
    best_val = objective(best)
    if m <= 4:
        batch = objective_batch or (lambda xs: np.array([objective(x) for x in xs]))
        gx, gval = grid_search_shares(batch, m, grid_resolution)
        if gval > best_val:
            polished = projected_gradient_ascent(objective, gx)
            pv = objective(polished)
            best, best_val = (polished, pv) if pv > gval else (gx, gval)
    return PopulationState(shares=best, n_devices=n_devices)


def assign(
    kind: StrategyKind,
    device_positions: np.ndarray,
    sat_positions: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-device satellite indices for the static strategies.

    random: seeded i.i.d. uniform; nearest: Euclidean argmin with ties to the
    lowest index; fixed: everyone on the configured target.
    """
    n = len(device_positions)
    m = len(sat_positions)
    if m < 1:
        raise ValueError("need at least one satellite")
    if kind.kind is Strategy.RANDOM:
        return rng.integers(0, m, size=n)
    if kind.kind is Strategy.NEAREST:
        dists = np.linalg.norm(device_positions[:, None, :] - sat_positions[None, :, :], axis=2)
        return np.argmin(dists, axis=1)
    if kind.kind is Strategy.FIXED:
        if kind.fixed_target >= m:
            raise ValueError(f"fixed_target {kind.fixed_target} out of range for M={m}")
        return np.full(n, kind.fixed_target, dtype=int)
    raise ValueError(f"assign() does not handle strategy {kind.kind}")


def exhaustive_optimal_counts(
    objective: Callable[[np.ndarray], float], n_devices: int, m: int
) -> tuple[tuple[int, ...], float]:
    """Exact integer-assignment optimum by enumerating device counts.

    Test oracle only; the composition count is tiny for n <= 12, m <= 3.
    """
    if n_devices > 12 or m > 3:
        raise ValueError("exhaustive oracle limited to n_devices <= 12 and m <= 3")
    best_counts = None
    best_val = -np.inf
    for counts in _compositions(n_devices, m):
        x = np.array(counts, dtype=float) / n_devices
        v = objective(x)
        if v > best_val:
            best_counts, best_val = counts, v
    return best_counts, float(best_val)
