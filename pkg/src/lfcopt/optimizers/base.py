from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Objective = Callable[[np.ndarray], float]


class BudgetExhausted(Exception):
    """Raised inside an optimizer when the evaluation cap is hit."""


@dataclass
class OptResult:
    best: np.ndarray
    best_cost: float
    history: list[float]
    evaluations: int
    seed: int | None
    method: str = ""
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "best": [float(v) for v in self.best],
            "best_cost": float(self.best_cost),
            "evaluations": int(self.evaluations),
            "history": [float(v) for v in self.history],
            "params": self.params,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "OptResult":
        return cls(best=np.asarray(data["best"], dtype=float), best_cost=float(data["best_cost"]),
                   history=[float(v) for v in data["history"]], evaluations=int(data["evaluations"]),
                   seed=data.get("seed"), method=data.get("method", ""), params=data.get("params", {}))


class Tracker:
    """Wraps an objective: counts calls, keeps the best raw cost, enforces a budget."""

    def __init__(self, objective: Objective, max_evaluations: int | None = None):
        self.objective = objective
        self.max_evaluations = max_evaluations
        self.evaluations = 0
        self.best_x: np.ndarray | None = None
        self.best_cost = np.inf
        self.history: list[float] = []

    @property
    def exhausted(self) -> bool:
        return self.max_evaluations is not None and self.evaluations >= self.max_evaluations

    def __call__(self, x) -> float:
        if self.exhausted:
            raise BudgetExhausted
        x = np.array(x, dtype=float)
        cost = float(self.objective(x))
        self.evaluations += 1
        if cost < self.best_cost:
            self.best_cost = cost
            self.best_x = x
        return cost

    def mark(self) -> None:
        """Close an outer iteration in the convergence history."""
        if self.best_x is not None:
            self.history.append(self.best_cost)

    def result(self, method: str, seed, params: dict) -> OptResult:
        if not self.history or self.history[-1] != self.best_cost:
            self.mark()
        return OptResult(best=self.best_x, best_cost=self.best_cost, history=list(self.history),
                         evaluations=self.evaluations, seed=seed, method=method, params=params)


def sphere(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.dot(x, x))
