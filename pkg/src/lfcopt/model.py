"""Physical configuration of the interconnected network and the tuning space.

Areas are numbered from 1 throughout the public API (``area 1``, ``ptie12``),
which matches how load-frequency studies label them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np


class ValidationError(ValueError):
    """Raised when a configuration fails validation; ``errors`` lists every problem."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class PlantCommon:
    f_nom: float = 60.0       # Hz
    rating: float = 2000.0    # MW
    H: float | None = 5.0     # s; None skips the Tp consistency check
    D: float = 0.00833        # pu MW/Hz
    Kp_plant: float = 120.0   # Hz/pu MW
    Tp: float = 20.0          # s


@dataclass(frozen=True)
class ThermalParams:
    Tg: float = 0.08
    Tt: float = 0.3
    Kr: float = 0.5
    Tr: float = 10.0
    grc: float = 0.0017       # pu MW/s
    grc_enabled: bool = True

    kind = "thermal"


@dataclass(frozen=True)
class HydroParams:
    # governor 1/(1+s Tgh), transient droop (1+s TR)/(1+s RT_ratio TR),
    # penstock (1-s Tw)/(1+0.5 s Tw); defaults give the common AGC form
    # 1/(1+0.513s) (1+5s)/(1+48.7s)
    Tgh: float = 0.513
    TR: float = 5.0
    RT_ratio: float = 9.74
    Tw: float = 1.0

    kind = "hydro"


@dataclass(frozen=True)
class WindParams:
    Ti: float = 3.0
    Kpt: float = 0.012
    Tpt: float = 10.55
    # recorded for completeness; the linear model runs at a fixed operating point
    air_density: float = 1.25
    wind_speed: float = 7.0
    blade_radius: float = 45.0
    gear_ratio: float = 70.0

    kind = "wind"


PrimeMover = Union[ThermalParams, HydroParams, WindParams]
PRIME_MOVERS = {"thermal": ThermalParams, "hydro": HydroParams, "wind": WindParams}


@dataclass(frozen=True)
class Area:
    plant: PlantCommon
    unit: PrimeMover
    name: str = ""


@dataclass(frozen=True)
class TieLine:
    area_a: int
    area_b: int
    T_sync: float = 0.544

    @property
    def label(self) -> str:
        return f"{self.area_a}{self.area_b}"


@dataclass(frozen=True)
class SystemConfig:
    areas: tuple[Area, ...]
    ties: tuple[TieLine, ...]
    p_tie_max_mw: float | None = None  # metadata only, never enforced

    @property
    def n_areas(self) -> int:
        return len(self.areas)

    def with_area(self, i: int, **changes) -> "SystemConfig":
        """Copy with area ``i`` (1-based) rebuilt from ``plant=``/``unit=``/``name=``."""
        areas = list(self.areas)
        areas[i - 1] = replace(areas[i - 1], **changes)
        return replace(self, areas=tuple(areas))

    def with_unit(self, i: int, **changes) -> "SystemConfig":
        return self.with_area(i, unit=replace(self.areas[i - 1].unit, **changes))


def nominal_system() -> SystemConfig:
    """Reheat thermal (area 1), wind (area 2), hydro (area 3), meshed by three ties."""
    areas = (
        Area(PlantCommon(rating=2000.0), ThermalParams(), "thermal"),
        Area(PlantCommon(rating=35.0), WindParams(), "wind"),
        Area(PlantCommon(rating=2000.0), HydroParams(), "hydro"),
    )
    ties = (TieLine(1, 2, 0.544), TieLine(1, 3, 0.544), TieLine(2, 3, 0.544))
    return SystemConfig(areas=areas, ties=ties, p_tie_max_mw=200.0)


def _positive(errors, path, value):
    if not (np.isfinite(value) and value > 0):
        errors.append(f"{path}: must be > 0 (got {value})")


def validate(config: SystemConfig) -> list[str]:
    """Return every violated invariant as ``"path: message"``; empty means valid."""
    errors: list[str] = []
    n = config.n_areas
    if n < 1:
        errors.append("areas: at least one area is required")

    for i, area in enumerate(config.areas, start=1):
        p = area.plant
        base = f"area{i}.plant"
        for name in ("f_nom", "rating", "Tp", "Kp_plant"):
            _positive(errors, f"{base}.{name}", getattr(p, name))
        if p.H is not None:
            _positive(errors, f"{base}.H", p.H)
        if not (np.isfinite(p.D) and p.D >= 0):
            errors.append(f"{base}.D: must be >= 0 (got {p.D})")
        if p.D > 0 and p.Kp_plant > 0 and abs(p.Kp_plant - 1.0 / p.D) / p.Kp_plant >= 0.01:
            errors.append(f"{base}.Kp_plant: inconsistent with 1/D = {1.0 / p.D:.6g}")
        if p.H is not None and p.D > 0 and p.Tp > 0 and p.f_nom > 0 and p.H > 0:
            tp = 2.0 * p.H / (p.f_nom * p.D)
            if abs(p.Tp - tp) / p.Tp >= 0.01:
                errors.append(f"{base}.Tp: inconsistent with 2H/(f_nom*D) = {tp:.6g}")

        u = area.unit
        base = f"area{i}.{getattr(u, 'kind', '?')}"
        if isinstance(u, ThermalParams):
            for name in ("Tg", "Tt", "Tr", "grc"):
                _positive(errors, f"{base}.{name}", getattr(u, name))
            if not (0 < u.Kr <= 1):
                errors.append(f"{base}.Kr: must lie in (0, 1] (got {u.Kr})")
        elif isinstance(u, HydroParams):
            for name in ("Tgh", "TR", "RT_ratio", "Tw"):
                _positive(errors, f"{base}.{name}", getattr(u, name))
            if u.Tw >= 2 * u.TR:
                errors.append(f"{base}.Tw: must be < 2*TR (got Tw={u.Tw}, TR={u.TR})")
        elif isinstance(u, WindParams):
            for name in ("Ti", "Kpt", "Tpt"):
                _positive(errors, f"{base}.{name}", getattr(u, name))
        else:
            errors.append(f"area{i}.unit: unknown prime mover {type(u).__name__}")

    seen = set()
    for k, tie in enumerate(config.ties):
        base = f"tie{k + 1}({tie.area_a}-{tie.area_b})"
        a, b = tie.area_a, tie.area_b
        if not (1 <= a <= n and 1 <= b <= n):
            errors.append(f"{base}: area index out of range 1..{n}")
            continue
        if a == b:
            errors.append(f"{base}: a tie must join two different areas")
            continue
        pair = frozenset((a, b))
        if pair in seen:
            errors.append(f"{base}: duplicate tie between areas {a} and {b}")
        seen.add(pair)
        _positive(errors, f"{base}.T_sync", tie.T_sync)

    if n >= 2 and not _connected(n, seen):
        errors.append("ties: tie graph does not connect all areas")
    return errors


def _connected(n: int, pairs) -> bool:
    adj = {i: set() for i in range(1, n + 1)}
    for pair in pairs:
        a, b = tuple(pair)
        adj[a].add(b)
        adj[b].add(a)
    reached, stack = {1}, [1]
    while stack:
        for j in adj[stack.pop()] - reached:
            reached.add(j)
            stack.append(j)
    return len(reached) == n


def check(config: SystemConfig) -> SystemConfig:
    errors = validate(config)
    if errors:
        raise ValidationError(errors)
    return config


def capacity_ratio(config: SystemConfig, i: int, j: int) -> float:
    """a_ij = -rating_i / rating_j, converting a flow in area-i pu to area-j pu."""
    n = config.n_areas
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"area index out of range 1..{n}: ({i}, {j})")
    if i == j:
        raise ValueError("capacity_ratio needs two different areas")
    return -config.areas[i - 1].plant.rating / config.areas[j - 1].plant.rating


# -- decision space ---------------------------------------------------------

PARAM_GROUPS = ("kp", "ki", "b", "r")


@dataclass(frozen=True)
class DecisionVector:
    """Per-area PI gains, frequency bias and droop.

    Flat layout is ``[kp_1..kp_n, ki_1..ki_n, b_1..b_n, r_1..r_n]``.
    """

    kp: tuple[float, ...]
    ki: tuple[float, ...]
    b: tuple[float, ...]
    r: tuple[float, ...]

    def __post_init__(self):
        sizes = {len(getattr(self, g)) for g in PARAM_GROUPS}
        if len(sizes) != 1:
            raise ValueError("kp, ki, b, r must have one entry per area")
        for g in PARAM_GROUPS:
            object.__setattr__(self, g, tuple(float(v) for v in getattr(self, g)))

    @property
    def n_areas(self) -> int:
        return len(self.kp)

    def to_array(self) -> np.ndarray:
        return np.concatenate([np.asarray(getattr(self, g), dtype=float) for g in PARAM_GROUPS])

    @classmethod
    def from_array(cls, x) -> "DecisionVector":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 4:
            raise ValueError(f"flat decision must have 4*n entries, got shape {x.shape}")
        n = x.size // 4
        return cls(*(tuple(x[k * n:(k + 1) * n]) for k in range(4)))

    def to_dict(self) -> dict:
        return {g: list(getattr(self, g)) for g in PARAM_GROUPS}

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionVector":
        return cls(*(tuple(data[g]) for g in PARAM_GROUPS))


def nominal_decision(config: SystemConfig, kp: float = 0.0, ki: float = 0.0) -> DecisionVector:
    """Reference droop (R=2.4) with B = D + 1/R, and the given PI gains in every area."""
    n = config.n_areas
    r = 2.4
    b = tuple(a.plant.D + 1.0 / r for a in config.areas)
    return DecisionVector((kp,) * n, (ki,) * n, b, (r,) * n)


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1-D arrays of the same length")
        if not np.all(lo < hi):
            raise ValueError("bounds require lower < upper elementwise")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def clamp(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    @classmethod
    def uniform(cls, dim: int, lower: float, upper: float) -> "Bounds":
        return cls(np.full(dim, float(lower)), np.full(dim, float(upper)))


DEFAULT_RANGES = {"kp": (0.001, 2.0), "ki": (0.001, 2.0), "b": (0.1, 1.0), "r": (1.0, 8.0)}


def default_bounds(n_areas: int = 3, ranges: dict | None = None) -> Bounds:
    ranges = {**DEFAULT_RANGES, **(ranges or {})}
    lo = np.concatenate([np.full(n_areas, ranges[g][0]) for g in PARAM_GROUPS])
    hi = np.concatenate([np.full(n_areas, ranges[g][1]) for g in PARAM_GROUPS])
    return Bounds(lo, hi)
