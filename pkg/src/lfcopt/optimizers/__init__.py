"""Box-bounded minimizers sharing one result type."""

from .base import OptResult, Tracker, sphere
from .bfo import (
    BFO_PROFILES,
    BfoParams,
    bfo_minimize,
    chemotaxis_sweep,
    eliminate_disperse,
    reproduce,
    survivor_order,
    swarming_cost,
    tumble_direction,
)
from .gd import GdParams, fd_gradient, gd_minimize
from .pso import PsoParams, pso_minimize

METHODS = ("bfo", "pso", "gd")


def minimize(method: str, objective, bounds, params=None, seed: int = 0, start=None) -> OptResult:
    """Dispatch to one of ``bfo``, ``pso`` or ``gd``."""
    if method == "bfo":
        return bfo_minimize(objective, bounds, params, seed)
    if method == "pso":
        return pso_minimize(objective, bounds, params, seed)
    if method == "gd":
        return gd_minimize(objective, bounds, params, start=start, seed=seed)
    raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


__all__ = [
    "BFO_PROFILES", "BfoParams", "GdParams", "METHODS", "OptResult", "PsoParams", "Tracker",
    "bfo_minimize", "chemotaxis_sweep", "eliminate_disperse", "fd_gradient", "gd_minimize", "minimize",
    "pso_minimize", "reproduce", "sphere", "survivor_order", "swarming_cost", "tumble_direction",
]
