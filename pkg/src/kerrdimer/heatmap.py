"""Standalone SVG heatmaps of sweep fields."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .contour import marching_squares

BLUE = (33, 102, 172)
WHITE = (247, 247, 247)
RED = (178, 24, 43)
NAN_GRAY = (160, 160, 160)

CONTOUR_STYLES = ((0.7, "2,3"), (1.3, "7,4"))  # level, dash pattern

WIDTH, HEIGHT = 640, 480
LEFT, RIGHT, TOP, BOTTOM = 80, 120, 40, 70


def diverging_color(value: float, vmin: float = 0.0, vmax: float = 2.0) -> tuple[int, int, int]:
    """Blue at vmin, white at the midpoint, red at vmax; clipped outside."""
    if value is None or math.isnan(value):
        return NAN_GRAY
    mid = 0.5 * (vmin + vmax)
    if value <= mid:
        t = min(1.0, (mid - value) / (mid - vmin))
        lo, hi = WHITE, BLUE
    else:
        t = min(1.0, (value - mid) / (vmax - mid))
        lo, hi = WHITE, RED
    return tuple(int(round(a + t * (b - a))) for a, b in zip(lo, hi))


def _hex(rgb) -> str:
    return "#%02x%02x%02x" % rgb


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _axis_map(grid: np.ndarray, lo_px: float, hi_px: float):
    """Data -> pixel, piecewise linear in grid index so each cell is equal sized."""
    n = len(grid)
    step = (hi_px - lo_px) / n

    def to_px(v):
        idx = np.interp(v, grid, np.arange(n)) if n > 1 else 0.0
        return lo_px + (idx + 0.5) * step

    return to_px, step


def heatmap_svg(x, y, z, title: str = "", xlabel: str = "J_ac/2π (MHz)",
                ylabel: str = "Ω/2π (MHz)", vmin: float = 0.0, vmax: float = 2.0) -> str:
    """SVG document for ``z[ix, iy]`` on the grid ``x`` by ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape != (len(x), len(y)):
        raise ValueError("field shape does not match grid")
    x0, x1 = LEFT, WIDTH - RIGHT
    y0, y1 = HEIGHT - BOTTOM, TOP  # y grows upward
    fx, sx = _axis_map(x, x0, x1)
    fy, sy = _axis_map(y, y0, y1)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        '<g id="cells" shape-rendering="crispEdges">',
    ]
    for i in range(len(x)):
        for j in range(len(y)):
            px = x0 + i * sx
            py = y0 + (j + 1) * sy  # sy is negative
            out.append(
                f'<rect x="{px:.2f}" y="{py:.2f}" width="{sx:.2f}" height="{-sy:.2f}" '
                f'fill="{_hex(diverging_color(z[i, j], vmin, vmax))}" '
                f'data-x="{float(x[i])!r}" data-y="{float(y[j])!r}" data-value="{float(z[i, j])!r}"/>'
            )
    out.append("</g>")

    out.append('<g id="contours" fill="none" stroke="#000000" stroke-width="1.5">')
    for level, dash in CONTOUR_STYLES:
        for line in marching_squares(x, y, z, level):
            pts = " ".join(f"{fx(px):.2f},{fy(py):.2f}" for px, py in line)
            out.append(f'<polyline data-level="{float(level)!r}" stroke-dasharray="{dash}" points="{pts}"/>')
    out.append("</g>")

    # axes and ticks at the grid values
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#000000"/>')
    for v in x:
        px = fx(v)
        out.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="#000000"/>')
        out.append(f'<text x="{px:.2f}" y="{y0 + 18}" text-anchor="middle">{_fmt(v)}</text>')
    for v in y:
        py = fy(v)
        out.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="#000000"/>')
        out.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt(v)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 25}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="20" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 20 {(y0 + y1) / 2:.1f})">{escape(ylabel)}</text>'
    )
    if title:
        out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{TOP - 15}" text-anchor="middle" font-size="14">{escape(title)}</text>')

    # colour bar
    bx, bw, n_steps = WIDTH - RIGHT + 30, 18, 40
    bh = (y0 - y1) / n_steps
    out.append('<g id="colorbar" shape-rendering="crispEdges">')
    for k in range(n_steps):
        v = vmin + (k + 0.5) * (vmax - vmin) / n_steps
        py = y0 - (k + 1) * bh
        out.append(f'<rect x="{bx}" y="{py:.2f}" width="{bw}" height="{bh:.2f}" fill="{_hex(diverging_color(v, vmin, vmax))}"/>')
    out.append(f'<rect x="{bx}" y="{y1}" width="{bw}" height="{y0 - y1}" fill="none" stroke="#000000"/>')
    for k in range(5):
        v = vmin + k * (vmax - vmin) / 4
        py = y0 - k * (y0 - y1) / 4
        out.append(f'<text x="{bx + bw + 6}" y="{py + 4:.2f}">{_fmt(v)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_heatmap(result, field: str, path) -> Path:
    """Write an SVG heatmap of one sweep field with 0.7 / 1.3 contours."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    svg = heatmap_svg(result.j_ac_mhz, result.omega_mhz, result.grid(field), title=field)
    path.write_text(svg, encoding="utf-8")
    return path
