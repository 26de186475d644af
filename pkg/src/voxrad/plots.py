"""Minimal static SVG charts (deterministic bytes, no plotting dependency)."""

from __future__ import annotations

from pathlib import Path

__all__ = ["line_chart_svg", "bar_chart_svg"]

_COLORS = ["#1f3b70", "#e07b39", "#3a7d44", "#8b2635", "#6b4fa0"]

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 60, 20, 40, 50


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / n
    return [lo + i * step for i in range(n + 1)]


def line_chart_svg(series, path, title="", xlabel="", ylabel="",
                   xlim=None, ylim=None) -> None:
    """Write a fixed-size line chart.

    ``series`` is a list of (label, xs, ys) triples; axes limits default to
    the data range.
    """
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x0, x1 = xlim if xlim else (min(xs_all, default=0.0), max(xs_all, default=1.0))
    y0, y1 = ylim if ylim else (min(ys_all, default=0.0), max(ys_all, default=1.0))
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def sx(x):
        return _ML + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return _MT + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="22" text-anchor="middle" font-size="15">{title}</text>',
    ]
    for tx in _ticks(x0, x1):
        px = sx(tx)
        out.append(f'<line x1="{_fmt(px)}" y1="{_MT}" x2="{_fmt(px)}" '
                   f'y2="{_MT + ph}" stroke="#dddddd"/>')
        out.append(f'<text x="{_fmt(px)}" y="{_MT + ph + 16}" '
                   f'text-anchor="middle">{_fmt(tx)}</text>')
    for ty in _ticks(y0, y1):
        py = sy(ty)
        out.append(f'<line x1="{_ML}" y1="{_fmt(py)}" x2="{_ML + pw}" '
                   f'y2="{_fmt(py)}" stroke="#dddddd"/>')
        out.append(f'<text x="{_ML - 6}" y="{_fmt(py + 4)}" '
                   f'text-anchor="end">{_fmt(ty)}</text>')
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
               f'fill="none" stroke="#333333"/>')
    out.append(f'<text x="{_ML + pw / 2}" y="{_H - 12}" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{_MT + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_MT + ph / 2})">{ylabel}</text>')

    for i, (label, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.8"/>')
        ly = _MT + 16 + 16 * i
        out.append(f'<line x1="{_ML + pw - 130}" y1="{ly - 4}" '
                   f'x2="{_ML + pw - 106}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="3"/>')
        out.append(f'<text x="{_ML + pw - 100}" y="{ly}">{label}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")


def bar_chart_svg(labels, values, path, title="", xlabel="") -> None:
    """Horizontal bar chart (signed values diverge around zero)."""
    n = len(labels)
    row_h = 18
    h = _MT + _MB + max(1, n) * row_h
    pw = _W - 240 - _MR
    vmax = max((abs(v) for v in values), default=1.0) or 1.0
    x_zero = 240 + pw / 2
    scale = (pw / 2) / vmax

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{h}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{h}" fill="white"/>',
        f'<text x="{_W / 2}" y="22" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{_fmt(x_zero)}" y1="{_MT}" x2="{_fmt(x_zero)}" '
        f'y2="{h - _MB}" stroke="#999999"/>',
    ]
    for i, (lab, v) in enumerate(zip(labels, values)):
        y = _MT + i * row_h
        w = abs(v) * scale
        x = x_zero if v >= 0 else x_zero - w
        color = "#8b2635" if v >= 0 else "#1f3b70"
        out.append(f'<text x="234" y="{y + 13}" text-anchor="end">{lab}</text>')
        out.append(f'<rect x="{_fmt(x)}" y="{y + 3}" width="{_fmt(w)}" '
                   f'height="{row_h - 6}" fill="{color}"/>')
    out.append(f'<text x="{_fmt(x_zero)}" y="{h - 14}" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
