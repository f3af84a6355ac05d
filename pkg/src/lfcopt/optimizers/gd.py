"""Finite-difference gradient descent with backtracking on the step rate."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..model import Bounds
from .base import BudgetExhausted, Objective, OptResult, Tracker


@dataclass(frozen=True)
class GdParams:
    iterations: int = 1000
    fd_step: float = 1e-3        # relative to each dimension's range
    learning_rate: float = 0.01
    backtrack: float = 0.5
    min_rate: float = 1e-6
    max_evaluations: int | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (self.fd_step > 0 and self.learning_rate > 0 and self.min_rate > 0):
            raise ValueError("fd_step, learning_rate and min_rate must be positive")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtrack must lie in (0, 1)")


def fd_gradient(objective: Objective, x, bounds: Bounds, fd_step: float) -> np.ndarray:
    """Central differences, falling back to one-sided ones at the box faces.

    Probe points never leave the box.
    """
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    h = fd_step * bounds.span
    for d in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi[d] = min(x[d] + h[d], bounds.upper[d])
        lo[d] = max(x[d] - h[d], bounds.lower[d])
        g[d] = (objective(hi) - objective(lo)) / (hi[d] - lo[d])
    return g


def gd_minimize(objective: Objective, bounds: Bounds, params: GdParams | None = None, start=None,
                seed: int | None = None) -> OptResult:
    """Descend from ``start`` (clamped into the box; the zero vector by default)."""
    params = params or GdParams()
    track = Tracker(objective, params.max_evaluations)
    x = bounds.clamp(np.zeros(bounds.dim) if start is None else start)
    rate = params.learning_rate
    try:
        fx = track(x)
        track.mark()
        for _ in range(params.iterations):
            g = fd_gradient(track, x, bounds, params.fd_step)
            while True:
                trial = bounds.clamp(x - rate * g)
                ft = track(trial) if not np.array_equal(trial, x) else fx
                if ft < fx:
                    x, fx = trial, ft
                    break
                rate *= params.backtrack
                if rate < params.min_rate:
                    break
            track.mark()
            if rate < params.min_rate:
                break
    except BudgetExhausted:
        pass
    return track.result("gd", seed, asdict(params))
