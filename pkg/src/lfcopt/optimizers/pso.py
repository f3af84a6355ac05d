"""Global-best particle swarm with position and velocity clamping."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..model import Bounds
from .base import BudgetExhausted, Objective, OptResult, Tracker


@dataclass(frozen=True)
class PsoParams:
    swarm_size: int = 30
    iterations: int = 100
    w: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445
    v_clamp: float = 0.5        # max speed per dimension, as a fraction of its range
    max_evaluations: int | None = None

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.w <= 1.0:
            raise ValueError("inertia w must lie in (0, 1]")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("c1 and c2 must be positive")
        if not self.v_clamp > 0:
            raise ValueError("v_clamp must be positive")


def pso_minimize(objective: Objective, bounds: Bounds, params: PsoParams | None = None, seed: int = 0) -> OptResult:
    params = params or PsoParams()
    rng = np.random.default_rng(seed)
    track = Tracker(objective, params.max_evaluations)
    n, p = params.swarm_size, bounds.dim
    vmax = params.v_clamp * bounds.span

    x = rng.uniform(bounds.lower, bounds.upper, size=(n, p))
    v = rng.uniform(-vmax, vmax, size=(n, p))
    pbest = x.copy()
    pbest_cost = np.full(n, np.inf)
    gbest, gbest_cost = x[0].copy(), np.inf
    try:
        for _ in range(params.iterations):
            for i in range(n):
                c = track(x[i])
                if c < pbest_cost[i]:
                    pbest_cost[i] = c
                    pbest[i] = x[i]
                    if c < gbest_cost:
                        gbest_cost, gbest = c, x[i].copy()
            track.mark()
            r1 = rng.random((n, p))
            r2 = rng.random((n, p))
            v = params.w * v + params.c1 * r1 * (pbest - x) + params.c2 * r2 * (gbest - x)
            v = np.clip(v, -vmax, vmax)
            x = bounds.clamp(x + v)
    except BudgetExhausted:
        pass
    return track.result("pso", seed, asdict(params))
