"""Dependency-free SVG polyline plots for run artifacts.

CSV files remain the source of truth; these plots exist so a run directory
can be inspected without any plotting stack installed.
"""

from __future__ import annotations

import math

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")
_W, _H = 640, 420
_MARGIN = 56


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(round(t, 10))
        t += step
    return out


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def polyline_plot(path, series, title: str = "", xlabel: str = "",
                  ylabel: str = "", y_min: float | None = None,
                  y_max: float | None = None) -> None:
    """Write a multi-series line plot.

    ``series`` is a list of (xs, ys, label) triples; axes are scaled to the
    joint data range.
    """
    xs_all = [float(x) for xs, _, _ in series for x in xs]
    ys_all = [float(y) for _, ys, _ in series for y in ys if math.isfinite(y)]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo = min(ys_all) if y_min is None else y_min
    y_hi = max(ys_all) if y_max is None else y_max
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x):
        return _MARGIN + (x - x_lo) / (x_hi - x_lo) * (_W - 2 * _MARGIN)

    def sy(y):
        return _H - _MARGIN - (y - y_lo) / (y_hi - y_lo) * (_H - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    # axes
    parts.append(
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>'
    )
    for t in _ticks(x_lo, x_hi):
        parts.append(
            f'<line x1="{sx(t):.1f}" y1="{_H - _MARGIN}" x2="{sx(t):.1f}" '
            f'y2="{_H - _MARGIN + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{sx(t):.1f}" y="{_H - _MARGIN + 16}" '
            f'text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        parts.append(
            f'<line x1="{_MARGIN - 4}" y1="{sy(t):.1f}" x2="{_MARGIN}" '
            f'y2="{sy(t):.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_MARGIN - 6}" y="{sy(t):.1f}" text-anchor="end" '
            f'dominant-baseline="middle">{_fmt(t)}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{_W / 2:.0f}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="16" y="{_H / 2:.0f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {_H / 2:.0f})">{ylabel}</text>'
        )
    for i, (xs, ys, label) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(
            f"{sx(float(x)):.1f},{sy(min(max(float(y), y_lo), y_hi)):.1f}"
            for x, y in zip(xs, ys)
            if math.isfinite(float(y))
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_W - _MARGIN - 4}" y="{_MARGIN + 14 * (i + 1)}" '
            f'text-anchor="end" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")


def histogram_plot(path, groups, bins: int = 30, title: str = "",
                   xlabel: str = "", ylabel: str = "count") -> None:
    """Step-outline histogram of one or more value groups on shared bins."""
    import numpy as np

    values = np.concatenate([np.asarray(v, dtype=float) for v, _ in groups])
    edges = np.histogram_bin_edges(values, bins=bins)
    series = []
    for vals, label in groups:
        counts, _ = np.histogram(vals, bins=edges)
        xs, ys = [edges[0]], [0.0]
        for i, c in enumerate(counts):
            xs.extend([edges[i], edges[i + 1]])
            ys.extend([float(c), float(c)])
        xs.append(edges[-1])
        ys.append(0.0)
        series.append((xs, ys, label))
    polyline_plot(path, series, title=title, xlabel=xlabel, ylabel=ylabel, y_min=0.0)
