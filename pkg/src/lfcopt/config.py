"""Plain-text (INI) configuration: system, bounds, simulation grid, optimizer settings.

Sections::

    [system]            p_tie_max_mw
    [area.N]            kind = thermal|hydro|wind, name, plant fields, unit fields
    [tie.A-B]           T_sync
    [bounds]            kp|ki|b|r = lower, upper   (or lower/upper = 4n comma-separated values)
    [disturbance]       area, magnitude, start_time
    [simulation]        dt, horizon, record_stride       (simulate / compare)
    [tuning]            dt, horizon, record_stride, penalty  (cost evaluations while tuning)
    [bfo] [pso] [gd]    overrides on top of the chosen budget profile
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .model import (
    DEFAULT_RANGES,
    PARAM_GROUPS,
    PRIME_MOVERS,
    Area,
    Bounds,
    PlantCommon,
    SystemConfig,
    TieLine,
    default_bounds,
    nominal_system,
)
from .objective import Scenario
from .optimizers import BfoParams, GdParams, PsoParams
from .simulator import Disturbance, SimOptions

TUNING_OPTIONS = SimOptions(dt=0.02, horizon=100.0)

DESK_BUDGET = 12_000
FULL_BFO = BfoParams(S=120, Nc=120, Ns=30, Nre=30, Ned=5, Ped=0.25)
FULL_BUDGET = FULL_BFO.S * FULL_BFO.Nc * FULL_BFO.Nre * FULL_BFO.Ned

PROFILES = {
    "desk": {
        "bfo": BfoParams(max_evaluations=DESK_BUDGET),
        "pso": PsoParams(swarm_size=30, iterations=DESK_BUDGET // 30),
        "gd": GdParams(iterations=DESK_BUDGET, max_evaluations=DESK_BUDGET),
    },
    "paper": {
        "bfo": FULL_BFO,
        "pso": PsoParams(swarm_size=30, iterations=FULL_BUDGET // 30),
        "gd": GdParams(iterations=FULL_BUDGET, max_evaluations=FULL_BUDGET),
    },
}


@dataclass
class RunConfig:
    system: SystemConfig = field(default_factory=nominal_system)
    bounds: Bounds = field(default_factory=default_bounds)
    disturbance: Disturbance = field(default_factory=Disturbance)
    simulation: SimOptions = field(default_factory=SimOptions)
    tuning: SimOptions = TUNING_OPTIONS
    penalty: float = 1e6
    optimizer_overrides: dict = field(default_factory=dict)

    def tuning_scenario(self) -> Scenario:
        return Scenario(self.system, self.disturbance, self.tuning, self.penalty)

    def simulation_scenario(self) -> Scenario:
        return Scenario(self.system, self.disturbance, self.simulation, self.penalty)

    def optimizer_params(self, method: str, profile: str = "desk"):
        if profile not in PROFILES:
            raise ValueError(f"unknown budget profile {profile!r}; expected one of {', '.join(PROFILES)}")
        if method not in PROFILES[profile]:
            raise ValueError(f"unknown method {method!r}")
        return replace(PROFILES[profile][method], **self.optimizer_overrides.get(method, {}))


def _num(text: str):
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if text.lower() in ("true", "false", "yes", "no", "on", "off"):
        return text.lower() in ("true", "yes", "on")
    try:
        return int(text)
    except ValueError:
        return float(text)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _section_values(section, cls, allow_extra=()):
    known = {f.name: f for f in fields(cls)}
    out = {}
    for key, raw in section.items():
        if key in allow_extra:
            continue
        name = next((k for k in known if k.lower() == key.lower()), None)
        if name is None:
            raise ValueError(f"[{section.name}] unknown key {key!r}")
        out[name] = _num(raw)
    return out


def load(text: str) -> RunConfig:
    """Parse config text. Missing sections fall back to the nominal system and defaults."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    cp.read_string(text)
    rc = RunConfig()

    area_sections = sorted((s for s in cp.sections() if s.startswith("area.")), key=lambda s: int(s.split(".")[1]))
    if area_sections:
        numbers = [int(s.split(".")[1]) for s in area_sections]
        if numbers != list(range(1, len(numbers) + 1)):
            raise ValueError("area sections must be numbered 1..N without gaps")
        areas = []
        for s in area_sections:
            sec = cp[s]
            kind = sec.get("kind", "").strip()
            if kind not in PRIME_MOVERS:
                raise ValueError(f"[{s}] kind must be one of {', '.join(PRIME_MOVERS)}")
            plant_keys = {f.name.lower() for f in fields(PlantCommon)}
            plant_vals, unit_vals = {}, {}
            for key, raw in sec.items():
                if key in ("kind", "name"):
                    continue
                (plant_vals if key.lower() in plant_keys else unit_vals)[key] = raw
            plant = PlantCommon(**_section_values(_Fake(s, plant_vals), PlantCommon))
            unit = PRIME_MOVERS[kind](**_section_values(_Fake(s, unit_vals), PRIME_MOVERS[kind]))
            areas.append(Area(plant, unit, sec.get("name", kind)))
        ties = []
        for s in cp.sections():
            if s.startswith("tie."):
                a, b = (int(v) for v in s[4:].split("-"))
                ties.append(TieLine(a, b, float(cp[s].get("T_sync", "0.544"))))
        p_max = _num(cp["system"].get("p_tie_max_mw", "none")) if cp.has_section("system") else None
        rc.system = SystemConfig(areas=tuple(areas), ties=tuple(ties), p_tie_max_mw=p_max)

    n = rc.system.n_areas
    rc.bounds = default_bounds(n)
    if cp.has_section("bounds"):
        sec = cp["bounds"]
        if "lower" in sec or "upper" in sec:
            rc.bounds = Bounds(np.array(_floats(sec["lower"])), np.array(_floats(sec["upper"])))
        else:
            ranges = dict(DEFAULT_RANGES)
            for g in PARAM_GROUPS:
                if g in sec:
                    lo, hi = _floats(sec[g])
                    ranges[g] = (lo, hi)
            rc.bounds = default_bounds(n, ranges)
        if rc.bounds.dim != 4 * n:
            raise ValueError(f"bounds have {rc.bounds.dim} entries, expected {4 * n}")

    if cp.has_section("disturbance"):
        rc.disturbance = Disturbance(**_section_values(cp["disturbance"], Disturbance))
    if cp.has_section("simulation"):
        rc.simulation = SimOptions(**_section_values(cp["simulation"], SimOptions))
    if cp.has_section("tuning"):
        vals = _section_values(cp["tuning"], SimOptions, allow_extra=("penalty",))
        rc.tuning = replace(TUNING_OPTIONS, **vals)
        if "penalty" in cp["tuning"]:
            rc.penalty = float(cp["tuning"]["penalty"])
    for method, cls in (("bfo", BfoParams), ("pso", PsoParams), ("gd", GdParams)):
        if cp.has_section(method):
            rc.optimizer_overrides[method] = _section_values(cp[method], cls)
    return rc


class _Fake(dict):
    """Adapter so plain dicts go through the same key checks as config sections."""

    def __init__(self, name, values):
        super().__init__(values)
        self.name = name


def load_file(path) -> RunConfig:
    with open(path) as fh:
        return load(fh.read())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    return repr(v) if isinstance(v, float) else str(v)


def dump(rc: RunConfig) -> str:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp["system"] = {"p_tie_max_mw": _fmt(rc.system.p_tie_max_mw)}
    for i, area in enumerate(rc.system.areas, start=1):
        sec = {"kind": area.unit.kind, "name": area.name or area.unit.kind}
        for f in fields(area.plant):
            sec[f.name] = _fmt(getattr(area.plant, f.name))
        for f in fields(area.unit):
            sec[f.name] = _fmt(getattr(area.unit, f.name))
        cp[f"area.{i}"] = sec
    for tie in rc.system.ties:
        cp[f"tie.{tie.area_a}-{tie.area_b}"] = {"T_sync": _fmt(tie.T_sync)}
    cp["bounds"] = {
        "lower": ", ".join(_fmt(float(v)) for v in rc.bounds.lower),
        "upper": ", ".join(_fmt(float(v)) for v in rc.bounds.upper),
    }
    cp["disturbance"] = {f.name: _fmt(getattr(rc.disturbance, f.name)) for f in fields(rc.disturbance)}
    cp["simulation"] = {f.name: _fmt(getattr(rc.simulation, f.name)) for f in fields(rc.simulation)}
    tuning = {f.name: _fmt(getattr(rc.tuning, f.name)) for f in fields(rc.tuning)}
    tuning["penalty"] = _fmt(rc.penalty)
    cp["tuning"] = tuning
    for method, over in sorted(rc.optimizer_overrides.items()):
        cp[method] = {k: _fmt(v) for k, v in over.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
