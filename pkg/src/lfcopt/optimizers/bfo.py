"""Bacterial foraging optimization over a box.

Loop structure (outermost first): elimination-dispersal events, reproduction
steps, chemotactic sweeps. Movement decisions use the raw cost plus the
cell-to-cell swarming term; the reported optimum is always the best raw cost.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..model import Bounds
from .base import BudgetExhausted, Objective, OptResult, Tracker


@dataclass(frozen=True)
class BfoParams:
    S: int = 20                # bacteria, even
    Nc: int = 30               # chemotactic steps per reproduction
    Ns: int = 4                # swim length limit
    Nre: int = 4               # reproduction steps per dispersal event
    Ned: int = 2               # elimination-dispersal events
    Ped: float = 0.25
    step_scale: float = 0.05   # initial run length C as a fraction of each dimension's range
    step_final: float = 0.02   # C on the last sweep relative to the first; 1.0 keeps C fixed
    # canonical widths; depths cut from 0.1 so the term stays a perturbation of the cost
    d_attract: float = 0.001
    w_attract: float = 0.2
    h_repellent: float = 0.001
    w_repellent: float = 10.0
    max_evaluations: int | None = None

    def __post_init__(self):
        for name in ("S", "Nc", "Ns", "Nre", "Ned"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.S % 2:
            raise ValueError("S must be even so that half the population can split")
        if not 0.0 <= self.Ped <= 1.0:
            raise ValueError("Ped must lie in [0, 1]")
        if not 0.0 < self.step_scale < 1.0:
            raise ValueError("step_scale must lie in (0, 1)")
        if not 0.0 < self.step_final <= 1.0:
            raise ValueError("step_final must lie in (0, 1]")
        if min(self.d_attract, self.w_attract, self.h_repellent, self.w_repellent) < 0:
            raise ValueError("swarming coefficients must be non-negative")

    @property
    def Sr(self) -> int:
        return self.S // 2

    @property
    def sweeps(self) -> int:
        return self.Nc * self.Nre * self.Ned

    def max_budget(self) -> int:
        return self.S * self.Nc * (1 + self.Ns) * self.Nre * self.Ned

    def run_length(self, sweep: int, span) -> np.ndarray:
        """Per-dimension C for the given sweep: geometric from step_scale down to step_scale*step_final."""
        frac = sweep / (self.sweeps - 1) if self.sweeps > 1 else 0.0
        return self.step_scale * self.step_final ** frac * np.asarray(span, dtype=float)


BFO_PROFILES = {
    "desk": BfoParams(),
    "paper": BfoParams(S=120, Nc=120, Ns=30, Nre=30, Ned=5, Ped=0.25),
}


def tumble_direction(rng: np.random.Generator, p: int) -> np.ndarray:
    """Random unit vector: ``p`` uniform draws on [-1, 1], normalized."""
    if p < 1:
        raise ValueError("dimension must be >= 1")
    while True:
        delta = rng.uniform(-1.0, 1.0, size=p)
        norm = np.sqrt(np.dot(delta, delta))
        if norm > 0.0:
            return delta / norm


def swarming_cost(theta, population, params: BfoParams = BfoParams()) -> float:
    """Attraction/repulsion offset added to the cost while bacteria move."""
    diff = np.asarray(population, dtype=float) - np.asarray(theta, dtype=float)
    d2 = np.sum(diff * diff, axis=-1)
    attract = -params.d_attract * np.exp(-params.w_attract * d2)
    repel = params.h_repellent * np.exp(-params.w_repellent * d2)
    return float(np.sum(attract) + np.sum(repel))


def chemotaxis_sweep(population, costs, objective: Objective, params: BfoParams, rng, bounds: Bounds,
                     step=None, directions=None):
    """One tumble-and-swim move for every bacterium.

    ``costs`` holds raw costs, NaN where not yet known. All tumble directions
    are drawn up front, so the rng sequence does not depend on swim outcomes.
    Returns ``(population, costs, health)`` where ``health`` is the augmented
    cost each bacterium ends the sweep with.
    """
    population = np.array(population, dtype=float)
    costs = np.array(costs, dtype=float)
    n, p = population.shape
    if step is None:
        step = params.step_scale * bounds.span
    if directions is None:
        directions = np.array([tumble_direction(rng, p) for _ in range(n)])
    snapshot = population.copy()
    health = np.zeros(n)

    for i in range(n):
        theta = population[i]
        if np.isnan(costs[i]):
            costs[i] = objective(theta)
        j_start = costs[i] + swarming_cost(theta, snapshot, params)

        move = step * directions[i]
        theta = bounds.clamp(theta + move)
        raw = objective(theta)
        j = raw + swarming_cost(theta, snapshot, params)
        population[i], costs[i] = theta, raw

        if j < j_start:
            for _ in range(params.Ns):
                trial = bounds.clamp(theta + move)
                if np.array_equal(trial, theta):
                    break
                raw_t = objective(trial)
                j_t = raw_t + swarming_cost(trial, snapshot, params)
                if not j_t < j:
                    break
                theta, j = trial, j_t
                population[i], costs[i] = trial, raw_t
        health[i] = j
    return population, costs, health


def survivor_order(health) -> np.ndarray:
    """Indices of the new population: the healthier half (lowest health), twice."""
    health = np.asarray(health, dtype=float)
    half = health.size // 2
    best = np.argsort(health, kind="stable")[:half]
    return np.concatenate([best, best])


def reproduce(population, health) -> np.ndarray:
    population = np.asarray(population, dtype=float)
    if population.shape[0] % 2:
        raise ValueError("population size must be even")
    return population[survivor_order(health)].copy()


def eliminate_disperse(population, params: BfoParams, bounds: Bounds, rng):
    """Relocate each bacterium uniformly in the box with probability ``Ped``.

    A fixed number of draws is consumed regardless of outcome. Returns the new
    population and the boolean mask of relocated members.
    """
    population = np.array(population, dtype=float)
    n, p = population.shape
    roll = rng.random(n)
    fresh = rng.uniform(bounds.lower, bounds.upper, size=(n, p))
    moved = roll < params.Ped
    population[moved] = fresh[moved]
    return population, moved


def bfo_minimize(objective: Objective, bounds: Bounds, params: BfoParams | None = None, seed: int = 0) -> OptResult:
    params = params or BfoParams()
    rng = np.random.default_rng(seed)
    track = Tracker(objective, params.max_evaluations)
    p = bounds.dim

    population = rng.uniform(bounds.lower, bounds.upper, size=(params.S, p))
    costs = np.full(params.S, np.nan)
    sweep = 0
    try:
        for _ in range(params.Ned):
            for _ in range(params.Nre):
                health = np.zeros(params.S)
                for _ in range(params.Nc):
                    step = params.run_length(sweep, bounds.span)
                    population, costs, h = chemotaxis_sweep(population, costs, track, params, rng, bounds, step)
                    health += h
                    sweep += 1
                    track.mark()
                keep = survivor_order(health)
                population, costs = population[keep], costs[keep]
            population, moved = eliminate_disperse(population, params, bounds, rng)
            costs[moved] = np.nan
    except BudgetExhausted:
        pass
    return track.result("bfo", seed, asdict(params))
