"""Minimal hand-written SVG line charts for frequency-deviation comparisons."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
MAX_POINTS = 2000


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + step * 1e-9, step)]


def _thin(times, values):
    if len(times) <= MAX_POINTS:
        return times, values
    idx = np.unique(np.linspace(0, len(times) - 1, MAX_POINTS).round().astype(int))
    return times[idx], values[idx]


def line_chart(series, title: str, xlabel: str, ylabel: str, width: int = 720, height: int = 420) -> str:
    """``series`` is a list of ``(label, times, values)``. Returns SVG text."""
    if not series:
        raise ValueError("nothing to plot")
    left, right, top, bottom = 80, 150, 40, 55
    pw, ph = width - left - right, height - top - bottom
    t_lo = min(float(np.min(t)) for _, t, _ in series)
    t_hi = max(float(np.max(t)) for _, t, _ in series)
    y_lo = min(float(np.min(v)) for _, _, v in series)
    y_hi = max(float(np.max(v)) for _, _, v in series)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    if t_hi <= t_lo:
        t_hi = t_lo + 1.0

    def sx(t):
        return left + (t - t_lo) / (t_hi - t_lo) * pw

    def sy(v):
        return top + (y_hi - v) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _nice_ticks(t_lo, t_hi):
        x = sx(t)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    for v in _nice_ticks(y_lo, y_hi):
        y = sy(v)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{v:.4g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(18 {top + ph / 2:.1f}) rotate(-90)" '
               f'text-anchor="middle">{escape(ylabel)}</text>')

    for k, (label, t, v) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        tt, vv = _thin(np.asarray(t, float), np.asarray(v, float))
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(tt, vv))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 + 20 * k
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def frequency_charts(runs) -> list[str]:
    """One chart per area from ``[(label, TraceSet), ...]``."""
    runs = list(runs)
    n = runs[0][1].n_areas
    charts = []
    for i in range(n):
        series = [(label, tr.times, tr.delta_f[i]) for label, tr in runs]
        charts.append(line_chart(series, f"Frequency deviation, area {i + 1}", "Time (s)", f"Δf{i + 1} (Hz)"))
    return charts
