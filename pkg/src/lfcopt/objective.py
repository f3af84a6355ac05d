"""ISE performance index and the bounded cost function handed to the optimizers."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import DecisionVector, SystemConfig, check, nominal_system
from .simulator import Disturbance, SimOptions, TraceSet, simulate_ise


@dataclass(frozen=True)
class Scenario:
    config: SystemConfig = field(default_factory=nominal_system)
    disturbance: Disturbance = field(default_factory=Disturbance)
    options: SimOptions = field(default_factory=SimOptions)
    penalty: float = 1e6

    def __post_init__(self):
        if not self.penalty > 0:
            raise ValueError("penalty must be positive")

    def to_dict(self) -> dict:
        cfg = {
            "areas": [
                {"name": a.name, "kind": a.unit.kind, "plant": asdict(a.plant), "unit": asdict(a.unit)}
                for a in self.config.areas
            ],
            "ties": [asdict(t) for t in self.config.ties],
            "p_tie_max_mw": self.config.p_tie_max_mw,
        }
        return {"config": cfg, "disturbance": asdict(self.disturbance),
                "options": asdict(self.options), "penalty": self.penalty}

    def digest(self) -> str:
        """Stable hash over every field that changes a cost value."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def ise(traces: TraceSet) -> float:
    """Trapezoidal integral of the summed squared frequency and tie-flow deviations."""
    integrand = np.sum(traces.delta_f ** 2, axis=0)
    if traces.delta_p_tie.size:
        integrand = integrand + np.sum(traces.delta_p_tie ** 2, axis=0)
    if traces.times.size < 2:
        return 0.0
    return float(np.trapezoid(integrand, traces.times))


def evaluate(decision, scenario: Scenario) -> float:
    """Simulate ``decision`` under ``scenario`` and score it.

    A diverged run costs ``penalty + (horizon - t_diverge)`` so that later
    blow-ups still rank better than early ones.
    """
    if not isinstance(decision, DecisionVector):
        decision = DecisionVector.from_array(decision)
    cost, t_div = simulate_ise(scenario.config, decision, scenario.disturbance, scenario.options)
    if t_div is not None:
        return scenario.penalty + (scenario.options.horizon - t_div)
    return cost


class ScenarioObjective:
    """Picklable ``f(x) -> cost`` over the flat decision layout."""

    def __init__(self, scenario: Scenario):
        check(scenario.config)
        self.scenario = scenario

    def __call__(self, x) -> float:
        return evaluate(DecisionVector.from_array(x), self.scenario)
