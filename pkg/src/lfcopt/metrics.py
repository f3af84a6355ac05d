"""Step-response figures of merit and method-by-area comparison tables."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass

import numpy as np

from .simulator import TraceSet

DEFAULT_BAND = 0.0005  # Hz
UNSETTLED = "—"


def _finite(series) -> np.ndarray:
    s = np.asarray(series, dtype=float)
    if s.size == 0:
        raise ValueError("series is empty")
    if not np.all(np.isfinite(s)):
        raise ValueError("series contains non-finite samples")
    return s


def peak_undershoot(series, times=None) -> float:
    """Largest excursion below zero, as a non-negative magnitude."""
    return float(max(0.0, -np.min(_finite(series))))


def peak_overshoot(series, times=None) -> float:
    return float(max(0.0, np.max(_finite(series))))


def settling_time(series, times, band: float = DEFAULT_BAND, relative: bool = False) -> float | None:
    """Earliest sample time after which ``|series|`` stays within ``band``.

    With ``relative=True`` the band is a fraction of the peak magnitude.
    Returns ``None`` when the last sample is still outside the band.
    """
    s = np.abs(_finite(series))
    t = np.asarray(times, dtype=float)
    if not band > 0:
        raise ValueError("band must be positive")
    limit = band * s.max() if relative else band
    outside = np.nonzero(s > limit)[0]
    if outside.size == 0:
        return float(t[0])
    last = outside[-1]
    if last == s.size - 1:
        return None
    return float(t[last + 1])


@dataclass(frozen=True)
class ResponseMetrics:
    peak_overshoot: float
    peak_undershoot: float
    settling_time: float | None
    steady_state_value: float

    def to_dict(self) -> dict:
        return asdict(self)


def response_metrics(series, times, band: float = DEFAULT_BAND, relative: bool = False) -> ResponseMetrics:
    s = _finite(series)
    return ResponseMetrics(
        peak_overshoot=peak_overshoot(s),
        peak_undershoot=peak_undershoot(s),
        settling_time=settling_time(s, times, band, relative),
        steady_state_value=float(s[-1]),
    )


def area_metrics(traces: TraceSet, band: float = DEFAULT_BAND, relative: bool = False) -> list[ResponseMetrics]:
    return [response_metrics(f, traces.times, band, relative) for f in traces.delta_f]


def roman(n: int) -> str:
    out = ""
    for value, sym in ((10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I")):
        while n >= value:
            out += sym
            n -= value
    return out


TABLES = (
    ("undershoot", "Peak Undershoot (Hz)"),
    ("overshoot", "Peak Overshoot (Hz)"),
    ("settling", "Settling Time (s)"),
)


@dataclass
class ComparisonReport:
    headers: list[str]
    tables: dict[str, list[list]]   # key -> rows of [label, value per area]
    band: float

    def _cell(self, v) -> str:
        if v is None:
            return UNSETTLED
        return f"{v:.6g}" if isinstance(v, float) else str(v)

    def to_text(self) -> str:
        chunks = []
        for key, title in TABLES:
            rows = [self.headers] + [[self._cell(v) for v in row] for row in self.tables[key]]
            widths = [max(len(r[c]) for r in rows) for c in range(len(self.headers))]
            lines = [title]
            for k, row in enumerate(rows):
                lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
                if k == 0:
                    lines.append("  ".join("-" * w for w in widths))
            chunks.append("\n".join(lines))
        return "\n\n".join(chunks) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["table"] + self.headers)
        for key, _ in TABLES:
            for row in self.tables[key]:
                w.writerow([key] + [self._cell(v) if not isinstance(v, float) else repr(v) for v in row])
        return buf.getvalue()


def comparison_report(runs, band: float = DEFAULT_BAND, relative: bool = False) -> ComparisonReport:
    """Methods as rows, areas as columns, for undershoot, overshoot and settling time.

    ``runs`` is a mapping or sequence of ``(label, TraceSet)``; all runs must
    come from the same disturbance and simulation settings.
    """
    items = list(runs.items()) if isinstance(runs, dict) else list(runs)
    if not items:
        raise ValueError("no runs to compare")
    ref = items[0][1]
    for label, tr in items[1:]:
        if tr.meta != ref.meta or tr.n_areas != ref.n_areas or tr.times.shape != ref.times.shape:
            raise ValueError(f"run {label!r} does not share the scenario of {items[0][0]!r}")
    headers = ["Method"] + [f"Area {roman(i)}" for i in range(1, ref.n_areas + 1)]
    tables = {key: [] for key, _ in TABLES}
    for label, tr in items:
        m = area_metrics(tr, band, relative)
        tables["undershoot"].append([label] + [x.peak_undershoot for x in m])
        tables["overshoot"].append([label] + [x.peak_overshoot for x in m])
        tables["settling"].append([label] + [x.settling_time for x in m])
    return ComparisonReport(headers=headers, tables=tables, band=band)
