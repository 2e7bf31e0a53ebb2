"""Deterministic SVG scatter plot of a two-dataset embedding."""

from __future__ import annotations

import numpy as np

from .errors import DataError
from .io import EmbeddingTable

CANVAS = 800
MARGIN = 0.05
RADIUS = 4
ARM = 4


def _c(v: float) -> str:
    return format(round(float(v), 3), "g")


def _bounds(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = hi - lo
    # degenerate axis: use a unit box centered on the data
    flat = span == 0
    lo = np.where(flat, lo - 0.5, lo)
    span = np.where(flat, 1.0, span)
    return lo - MARGIN * span, span * (1 + 2 * MARGIN)


def render_svg(table: EmbeddingTable, pairs: bool = False) -> str:
    y1, y2 = table.y1, table.y2
    m = max(y1.shape[1], y2.shape[1])
    if m < 2:
        raise DataError("plot needs at least two embedding coordinates")
    if len(y1) + len(y2) == 0:
        raise DataError("embedding has no rows")
    pts = np.vstack([y[:, :2] for y in (y1, y2) if len(y)])
    lo, span = _bounds(pts)

    def to_canvas(p):
        x = (p[0] - lo[0]) / span[0] * CANVAS
        y = CANVAS - (p[1] - lo[1]) / span[1] * CANVAS
        return x, y

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" '
        f'viewBox="0 0 {CANVAS} {CANVAS}">',
        f'<rect width="{CANVAS}" height="{CANVAS}" fill="white"/>',
    ]
    if pairs:
        where2 = {i: k for k, i in enumerate(table.ids2)}
        out.append('<g class="pairs" stroke="#999999" stroke-width="0.5">')
        for k, i in enumerate(table.ids1):
            if i in where2:
                xa, ya = to_canvas(y1[k, :2])
                xb, yb = to_canvas(y2[where2[i], :2])
                out.append(f'<line x1="{_c(xa)}" y1="{_c(ya)}" x2="{_c(xb)}" y2="{_c(yb)}"/>')
        out.append("</g>")
    out.append('<g class="dataset1" fill="none" stroke="#1f77b4">')
    for p in y1:
        x, y = to_canvas(p[:2])
        out.append(f'<circle cx="{_c(x)}" cy="{_c(y)}" r="{RADIUS}"/>')
    out.append("</g>")
    out.append('<g class="dataset2" stroke="#d62728">')
    for p in y2:
        x, y = to_canvas(p[:2])
        out.append(
            f'<path d="M{_c(x - ARM)},{_c(y - ARM)}L{_c(x + ARM)},{_c(y + ARM)}'
            f'M{_c(x - ARM)},{_c(y + ARM)}L{_c(x + ARM)},{_c(y - ARM)}"/>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
