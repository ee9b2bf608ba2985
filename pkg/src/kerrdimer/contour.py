"""Marching-squares level sets on rectilinear grids."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

# corners of cell (i, j): 0 (i, j), 1 (i+1, j), 2 (i+1, j+1), 3 (i, j+1)
_CORNER_OFFSETS = ((0, 0), (1, 0), (1, 1), (0, 1))
# edges as (corner, corner)
_EDGES = ((0, 1), (1, 2), (3, 2), (0, 3))


def _edge_key(i: int, j: int, e: int) -> tuple:
    if e == 0:
        return ("x", i, j)
    if e == 1:
        return ("y", i + 1, j)
    if e == 2:
        return ("x", i, j + 1)
    return ("y", i, j)


def _cell_segments(above, center_above):
    """Edge pairs crossed by the level inside one cell."""
    crossed = [e for e, (p, q) in enumerate(_EDGES) if above[p] != above[q]]
    if len(crossed) == 2:
        return [tuple(crossed)]
    if len(crossed) == 4:
        # saddle: the cell centre (mean of the corners) decides which
        # diagonal pair of corners is joined
        if center_above == above[0]:
            return [(0, 1), (2, 3)]
        return [(3, 0), (1, 2)]
    return []


def marching_squares(x, y, z, level: float) -> list[np.ndarray]:
    """Polylines where the field ``z[ix, iy]`` crosses ``level``.

    ``x`` and ``y`` are increasing (possibly non-uniform) axis coordinates.
    Crossing points are linearly interpolated along cell edges. Each
    polyline is an (N, 2) array of (x, y) points; closed loops repeat their
    first point at the end. Cells touching a NaN are skipped.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape != (len(x), len(y)):
        raise ValueError(f"field shape {z.shape} does not match grid ({len(x)}, {len(y)})")
    if len(x) < 2 or len(y) < 2:
        return []

    points: dict = {}

    def point(key):
        if key not in points:
            kind, i, j = key
            if kind == "x":
                (x0, y0, z0), (x1, y1, z1) = (x[i], y[j], z[i, j]), (x[i + 1], y[j], z[i + 1, j])
            else:
                (x0, y0, z0), (x1, y1, z1) = (x[i], y[j], z[i, j]), (x[i], y[j + 1], z[i, j + 1])
            t = (level - z0) / (z1 - z0)
            points[key] = (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
        return points[key]

    segments = []
    for i in range(len(x) - 1):
        for j in range(len(y) - 1):
            vals = [z[i + di, j + dj] for di, dj in _CORNER_OFFSETS]
            if any(np.isnan(vals)):
                continue
            above = [v > level for v in vals]
            center = sum(vals) / 4 > level
            for ea, eb in _cell_segments(above, center):
                segments.append((_edge_key(i, j, ea), _edge_key(i, j, eb)))
    lines = []
    for chain in _chain(segments):
        pts = np.array([point(k) for k in chain])
        # a level through a grid vertex yields the same point from two edges
        keep = np.ones(len(pts), bool)
        keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
        lines.append(pts[keep])
    return lines


def _chain(segments) -> list[list]:
    adj = defaultdict(list)
    for n, (a, b) in enumerate(segments):
        adj[a].append(n)
        adj[b].append(n)
    used = [False] * len(segments)

    def walk(start):
        chain = [start]
        key = start
        while True:
            nxt = [n for n in adj[key] if not used[n]]
            if not nxt:
                return chain
            n = nxt[0]
            used[n] = True
            a, b = segments[n]
            key = b if a == key else a
            chain.append(key)

    chains = []
    # open polylines start at boundary edges (one incident segment)
    for key in sorted(k for k, v in adj.items() if len(v) == 1):
        if not all(used[n] for n in adj[key]):
            chains.append(walk(key))
    for n, (a, _) in enumerate(segments):
        if not used[n]:
            chains.append(walk(a))
    return chains


def extract_contour(result, field: str, level: float) -> list[np.ndarray]:
    """Contours of a sweep field in (j_ac, omega) MHz coordinates."""
    return marching_squares(result.j_ac_mhz, result.omega_mhz, result.grid(field), level)


def contours_to_json(result, fields=("g2_ab", "g2_aa"), levels=(0.7, 1.0, 1.3)) -> dict:
    out = {"axes": {"x": "j_ac_mhz", "y": "omega_mhz"}, "fields": {}}
    for f in fields:
        out["fields"][f] = {
            repr(float(level)): [line.tolist() for line in extract_contour(result, f, level)]
            for level in levels
        }
    return out
