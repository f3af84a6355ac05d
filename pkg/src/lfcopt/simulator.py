"""Block-diagram assembly and fixed-step RK4 integration of the interconnected system.

Everything but the generation rate constraint is linear, so the assembled model
is ``x' = A x + e d(t)`` with ``A`` stored row-sparse; the GRC is a clamp on
selected entries of ``x'`` applied at every Runge-Kutta stage.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .model import (
    DecisionVector,
    HydroParams,
    SystemConfig,
    ThermalParams,
    WindParams,
    capacity_ratio,
    check,
)

F_DIVERGE = 5.0  # Hz
CHAIN_STATES = {"thermal": 3, "hydro": 3, "wind": 2}


@dataclass(frozen=True)
class Disturbance:
    area: int = 1
    magnitude: float = 0.01   # pu MW, step
    start_time: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.magnitude):
            raise ValueError("disturbance magnitude must be finite")
        if not self.start_time >= 0:
            raise ValueError("disturbance start_time must be >= 0")


@dataclass(frozen=True)
class SimOptions:
    dt: float = 0.01
    horizon: float = 250.0
    record_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.horizon >= 10 * self.dt:
            raise ValueError("horizon must be at least 10*dt")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be an integer >= 1")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.horizon / self.dt + 1e-9))

    @property
    def n_samples(self) -> int:
        return self.n_steps // self.record_stride + 1


def grc_clamp(rate: float, limit: float) -> float:
    """Clip a rate of change to ``[-limit, +limit]``."""
    if not limit > 0:
        raise ValueError("GRC limit must be > 0")
    return min(max(rate, -limit), limit)


def state_dimension(config: SystemConfig) -> int:
    return 2 * config.n_areas + sum(CHAIN_STATES[a.unit.kind] for a in config.areas) + len(config.ties)


@dataclass
class LinearModel:
    """Assembled dynamics. Output matrices map a state row to recorded signals."""

    A: np.ndarray
    E: np.ndarray              # (n_states, n_areas) load-step input per area
    grc_idx: np.ndarray
    grc_lim: np.ndarray
    f_idx: np.ndarray
    C_f: np.ndarray
    C_tie: np.ndarray
    C_pg: np.ndarray
    C_ace: np.ndarray
    tie_labels: list[str]
    state_names: list[str]

    @property
    def n_states(self) -> int:
        return self.A.shape[0]


def assemble(config: SystemConfig, decision: DecisionVector) -> LinearModel:
    """Build ``A`` and the output maps for a configuration and decision."""
    n_areas = config.n_areas
    if decision.n_areas != n_areas:
        raise ValueError(f"decision has {decision.n_areas} areas, config has {n_areas}")

    names: list[str] = []
    layout = []
    for i, area in enumerate(config.areas, start=1):
        base = len(names)
        chain = {"thermal": ("xg", "pt", "prh"), "hydro": ("xg", "xc", "xp"), "wind": ("xi", "pw")}[area.unit.kind]
        names += [f"df{i}", f"z{i}"] + [f"{c}{i}" for c in chain]
        layout.append(base)
    tie_base = len(names)
    names += [f"ptie{t.label}" for t in config.ties]
    n = len(names)
    assert n == state_dimension(config)

    A = np.zeros((n, n))
    E = np.zeros((n, n_areas))
    C_f = np.zeros((n_areas, n))
    C_pg = np.zeros((n_areas, n))
    C_ace = np.zeros((n_areas, n))
    C_tie = np.zeros((len(config.ties), n))
    tie_total = np.zeros((n_areas, n))
    grc_idx, grc_lim = [], []

    for k, tie in enumerate(config.ties):
        s = tie_base + k
        a, b = tie.area_a - 1, tie.area_b - 1
        C_tie[k, s] = 1.0
        tie_total[a, s] += 1.0
        tie_total[b, s] += capacity_ratio(config, tie.area_a, tie.area_b)
        w = 2.0 * math.pi * tie.T_sync
        A[s, layout[a]] += w
        A[s, layout[b]] -= w

    for i, area in enumerate(config.areas):
        f, z = layout[i], layout[i] + 1
        c = f + 2
        p, u = area.plant, area.unit
        C_f[i, f] = 1.0

        ace = tie_total[i].copy()
        ace[f] += decision.b[i]
        C_ace[i] = ace
        A[z] += ace

        # governor input: -(Kp*ACE + Ki*z) - df/R
        gov = -decision.kp[i] * ace
        gov[z] -= decision.ki[i]
        gov[f] -= 1.0 / decision.r[i]

        pg = np.zeros(n)
        if isinstance(u, ThermalParams):
            xg, pt, prh = c, c + 1, c + 2
            A[xg] += gov / u.Tg
            A[xg, xg] -= 1.0 / u.Tg
            A[pt, xg] += 1.0 / u.Tt
            A[pt, pt] -= 1.0 / u.Tt
            A[prh, pt] += 1.0 / u.Tr
            A[prh, prh] -= 1.0 / u.Tr
            # (1 + s Kr Tr)/(1 + s Tr) = Kr + (1 - Kr)/(1 + s Tr)
            pg[pt] = u.Kr
            pg[prh] = 1.0 - u.Kr
            if u.grc_enabled:
                grc_idx.append(pt)
                grc_lim.append(u.grc)
        elif isinstance(u, HydroParams):
            xg, xc, xp = c, c + 1, c + 2
            ratio = u.RT_ratio
            A[xg] += gov / u.Tgh
            A[xg, xg] -= 1.0 / u.Tgh
            A[xc, xg] += 1.0 / (ratio * u.TR)
            A[xc, xc] -= 1.0 / (ratio * u.TR)
            # (1 + s TR)/(1 + s ratio TR) = 1/ratio + (1 - 1/ratio)/(1 + s ratio TR)
            yc = np.zeros(n)
            yc[xg] = 1.0 / ratio
            yc[xc] = 1.0 - 1.0 / ratio
            # (1 - s Tw)/(1 + 0.5 s Tw) = -2 + 3/(1 + 0.5 s Tw)
            A[xp] += yc / (0.5 * u.Tw)
            A[xp, xp] -= 1.0 / (0.5 * u.Tw)
            pg = -2.0 * yc
            pg[xp] += 3.0
        elif isinstance(u, WindParams):
            xi, pw = c, c + 1
            A[xi] += gov / u.Ti
            A[xi, xi] -= 1.0 / u.Ti
            A[pw, xi] += u.Kpt / u.Tpt
            A[pw, pw] -= 1.0 / u.Tpt
            pg[pw] = 1.0
        else:  # pragma: no cover - validate() rejects this first
            raise TypeError(f"unsupported prime mover {type(u).__name__}")
        C_pg[i] = pg

        gain = p.Kp_plant / p.Tp
        A[f] += gain * (pg - tie_total[i])
        A[f, f] -= 1.0 / p.Tp
        E[f, i] = -gain

    return LinearModel(
        A=A,
        E=E,
        grc_idx=np.asarray(grc_idx, dtype=np.int64),
        grc_lim=np.asarray(grc_lim, dtype=float),
        f_idx=np.asarray(layout, dtype=np.int64),
        C_f=C_f,
        C_tie=C_tie,
        C_pg=C_pg,
        C_ace=C_ace,
        tie_labels=[t.label for t in config.ties],
        state_names=names,
    )


def _to_csr(A):
    indptr = [0]
    indices, data = [], []
    for row in A:
        nz = np.nonzero(row)[0]
        indices.extend(nz)
        data.extend(row[nz])
        indptr.append(len(indices))
    return (np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64),
            np.asarray(data, dtype=float))


@njit(cache=True)
def _deriv(x, t, indptr, indices, data, e, t_start, grc_idx, grc_lim, out):
    n = x.size
    load = 1.0 if t >= t_start else 0.0
    for r in range(n):
        acc = 0.0
        for k in range(indptr[r], indptr[r + 1]):
            acc += data[k] * x[indices[k]]
        out[r] = acc + e[r] * load
    for k in range(grc_idx.size):
        j = grc_idx[k]
        lim = grc_lim[k]
        if out[j] > lim:
            out[j] = lim
        elif out[j] < -lim:
            out[j] = -lim


@njit(cache=True)
def _rk4(indptr, indices, data, e, t_start, grc_idx, grc_lim, dt, n_steps, stride, f_idx, tie_idx, f_max,
         record):
    """Integrate from rest. Returns (recorded states, diverge step or -1, ISE on the recorded grid)."""
    n = indptr.size - 1
    rec = np.zeros((n_steps // stride + 1 if record else 1, n))
    x = np.zeros(n)
    xs = np.zeros(n)
    k1 = np.zeros(n)
    k2 = np.zeros(n)
    k3 = np.zeros(n)
    k4 = np.zeros(n)
    half = 0.5 * dt
    n_rec = 1
    g_prev = 0.0
    acc = 0.0
    for step in range(n_steps):
        t = step * dt
        _deriv(x, t, indptr, indices, data, e, t_start, grc_idx, grc_lim, k1)
        for r in range(n):
            xs[r] = x[r] + half * k1[r]
        _deriv(xs, t + half, indptr, indices, data, e, t_start, grc_idx, grc_lim, k2)
        for r in range(n):
            xs[r] = x[r] + half * k2[r]
        _deriv(xs, t + half, indptr, indices, data, e, t_start, grc_idx, grc_lim, k3)
        for r in range(n):
            xs[r] = x[r] + dt * k3[r]
        _deriv(xs, t + dt, indptr, indices, data, e, t_start, grc_idx, grc_lim, k4)
        total = 0.0
        for r in range(n):
            x[r] += dt / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r])
            total += x[r]
        bad = not math.isfinite(total)
        for j in f_idx:
            if abs(x[j]) > f_max:
                bad = True
        if bad:
            return rec[:n_rec], step + 1, acc
        if (step + 1) % stride == 0:
            g = 0.0
            for j in f_idx:
                g += x[j] * x[j]
            for j in tie_idx:
                g += x[j] * x[j]
            acc += 0.5 * (g_prev + g) * (dt * stride)
            g_prev = g
            if record:
                rec[n_rec] = x
            n_rec += 1
    return rec[:n_rec], -1, acc


def _run(config, decision, disturbance, options, record):
    check(config)
    if not 1 <= disturbance.area <= config.n_areas:
        raise ValueError(f"disturbance area {disturbance.area} out of range 1..{config.n_areas}")
    model = assemble(config, decision)
    indptr, indices, data = _to_csr(model.A)
    e = np.ascontiguousarray(model.E[:, disturbance.area - 1] * disturbance.magnitude)
    tie_idx = np.arange(model.n_states - len(config.ties), model.n_states, dtype=np.int64)
    rec, div_step, acc = _rk4(indptr, indices, data, e, float(disturbance.start_time), model.grc_idx,
                              model.grc_lim, float(options.dt), options.n_steps, int(options.record_stride),
                              model.f_idx, tie_idx, F_DIVERGE, record)
    t_div = div_step * options.dt if div_step >= 0 else None
    return model, rec, t_div, acc


@dataclass
class TraceSet:
    times: np.ndarray
    delta_f: np.ndarray        # (n_areas, T) Hz
    delta_p_tie: np.ndarray    # (n_ties, T) pu MW, pairwise flow in the first area's base
    delta_p_g: np.ndarray      # (n_areas, T) pu MW
    ace: np.ndarray            # (n_areas, T) pu MW
    tie_labels: list[str]
    diverged: bool = False
    t_diverge: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_areas(self) -> int:
        return self.delta_f.shape[0]

    def tie_totals(self, config: SystemConfig) -> np.ndarray:
        """Per-area net tie deviation, each in its own area's pu base."""
        out = np.zeros_like(self.delta_f)
        for k, tie in enumerate(config.ties):
            out[tie.area_a - 1] += self.delta_p_tie[k]
            out[tie.area_b - 1] += capacity_ratio(config, tie.area_a, tie.area_b) * self.delta_p_tie[k]
        return out

    def columns(self) -> list[str]:
        n = self.n_areas
        return (["t"] + [f"delf{i}" for i in range(1, n + 1)] + [f"ptie{lab}" for lab in self.tie_labels]
                + [f"pg{i}" for i in range(1, n + 1)] + [f"ace{i}" for i in range(1, n + 1)])

    def to_rows(self) -> np.ndarray:
        return np.vstack([self.times, self.delta_f, self.delta_p_tie, self.delta_p_g, self.ace]).T

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns())
            for row in self.to_rows():
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "TraceSet":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, len(header))
        n = sum(1 for h in header if h.startswith("delf"))
        labels = [h[4:] for h in header if h.startswith("ptie")]
        m = len(labels)
        cols = data.T
        return cls(times=cols[0], delta_f=cols[1:1 + n], delta_p_tie=cols[1 + n:1 + n + m],
                   delta_p_g=cols[1 + n + m:1 + 2 * n + m], ace=cols[1 + 2 * n + m:], tie_labels=labels)


def simulate(config: SystemConfig, decision: DecisionVector, disturbance: Disturbance,
             options: SimOptions | None = None) -> TraceSet:
    """Integrate the closed loop from rest under a single load step.

    Bounds on ``decision`` are not enforced here; the optimizers own that.
    A run whose frequency leaves +/-5 Hz, or whose state goes non-finite, is
    returned truncated with ``diverged=True``.
    """
    options = options or SimOptions()
    model, rec, t_div, _ = _run(config, decision, disturbance, options, True)
    times = np.arange(rec.shape[0]) * (options.dt * options.record_stride)
    return TraceSet(
        times=times,
        delta_f=model.C_f @ rec.T,
        delta_p_tie=model.C_tie @ rec.T,
        delta_p_g=model.C_pg @ rec.T,
        ace=model.C_ace @ rec.T,
        tie_labels=model.tie_labels,
        diverged=t_div is not None,
        t_diverge=t_div,
        meta={
            "disturbance": {"area": disturbance.area, "magnitude": disturbance.magnitude,
                            "start_time": disturbance.start_time},
            "options": {"dt": options.dt, "horizon": options.horizon,
                        "record_stride": options.record_stride},
        },
    )


def simulate_ise(config: SystemConfig, decision: DecisionVector, disturbance: Disturbance,
                 options: SimOptions | None = None) -> tuple[float, float | None]:
    """ISE accumulated during integration without storing traces.

    Returns ``(ise, t_diverge)``; ``t_diverge`` is None for a clean run.
    """
    options = options or SimOptions()
    _, _, t_div, acc = _run(config, decision, disturbance, options, False)
    return acc, t_div
