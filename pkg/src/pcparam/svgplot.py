"""Hand-rolled deterministic SVG figures: scatter, line series, histogram.

No timestamps, no randomness, fixed viewport, fixed-precision coordinates,
so two identical runs emit byte-identical files.
"""

from __future__ import annotations

import numpy as np

__all__ = ["scatter_svg", "line_series_svg", "histogram_svg"]

WIDTH = 640
HEIGHT = 480
MARGIN = 48
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]


def _fmt(v: float) -> str:
    return f"{float(v):.3f}"


def _document(body: list[str], extra_root_attrs: str = "") -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}"{extra_root_attrs}>'
    )
    bg = f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>'
    return "\n".join([head, bg, *body, "</svg>"]) + "\n"


class _Frame:
    """Maps data coordinates into the plot rectangle, y up."""

    def __init__(self, xlim: tuple[float, float], ylim: tuple[float, float]):
        def pad(lo: float, hi: float) -> tuple[float, float]:
            if hi <= lo:
                lo, hi = lo - 0.5, lo + 0.5
            span = hi - lo
            return lo - 0.05 * span, hi + 0.05 * span

        self.x0, self.x1 = pad(*xlim)
        self.y0, self.y1 = pad(*ylim)

    def x(self, v: float) -> float:
        t = (v - self.x0) / (self.x1 - self.x0)
        return MARGIN + t * (WIDTH - 2 * MARGIN)

    def y(self, v: float) -> float:
        t = (v - self.y0) / (self.y1 - self.y0)
        return HEIGHT - MARGIN - t * (HEIGHT - 2 * MARGIN)

    def axes(self) -> list[str]:
        parts = [
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
            f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="#444444" stroke-width="1"/>'
        ]
        labels = [
            (MARGIN, HEIGHT - MARGIN + 14, self.x0, "start"),
            (WIDTH - MARGIN, HEIGHT - MARGIN + 14, self.x1, "end"),
            (MARGIN - 4, HEIGHT - MARGIN, self.y0, "end"),
            (MARGIN - 4, MARGIN + 8, self.y1, "end"),
        ]
        for px, py, val, anchor in labels:
            parts.append(
                f'<text x="{_fmt(px)}" y="{_fmt(py)}" font-family="monospace" '
                f'font-size="10" text-anchor="{anchor}" fill="#444444">{val:.4g}</text>'
            )
        return parts


def _empty_axes() -> str:
    frame = _Frame((0.0, 1.0), (0.0, 1.0))
    return _document(frame.axes())


def scatter_svg(points, loops=None) -> str:
    """Scatter of a planar cloud, optionally overlaying closed loops in red.

    `loops` is a list of (k, 2) polyline arrays (closed implicitly).
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(points) == 0:
        return _empty_axes()
    frame = _Frame(
        (float(points[:, 0].min()), float(points[:, 0].max())),
        (float(points[:, 1].min()), float(points[:, 1].max())),
    )
    body = frame.axes()
    for px, py in points:
        body.append(
            f'<circle cx="{_fmt(frame.x(px))}" cy="{_fmt(frame.y(py))}" r="1.6" '
            f'fill="#1f77b4" fill-opacity="0.7"/>'
        )
    for loop in loops or []:
        loop = np.asarray(loop, dtype=np.float64).reshape(-1, 2)
        pts = " ".join(f"{_fmt(frame.x(px))},{_fmt(frame.y(py))}" for px, py in loop)
        body.append(
            f'<polygon points="{pts}" fill="none" stroke="#d62728" stroke-width="1.5"/>'
        )
    return _document(body)


def line_series_svg(series: dict[str, list[tuple[float, float]]]) -> str:
    """One polyline per named series, shared axes, legend in the top margin.

    Series with no points are skipped; all-empty input gives an axis-only
    figure.
    """
    named = [(name, pts) for name, pts in series.items() if pts]
    if not named:
        return _empty_axes()
    all_x = [x for _, pts in named for x, _ in pts]
    all_y = [y for _, pts in named for _, y in pts]
    frame = _Frame((min(all_x), max(all_x)), (min(all_y), max(all_y)))
    body = frame.axes()
    for k, (name, pts) in enumerate(named):
        color = PALETTE[k % len(PALETTE)]
        coords = " ".join(f"{_fmt(frame.x(x))},{_fmt(frame.y(y))}" for x, y in pts)
        body.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        body.append(
            f'<text x="{_fmt(MARGIN + 8 + 150 * k)}" y="{_fmt(MARGIN - 8)}" '
            f'font-family="monospace" font-size="10" fill="{color}">{name}</text>'
        )
    return _document(body)


def histogram_svg(counts, edges) -> str:
    """Bar chart of pre-binned counts; bin edges must be one longer.

    The root element carries data-bins="<n>" so figures can be audited by
    parsing the attribute back.
    """
    counts = np.asarray(counts, dtype=np.float64).ravel()
    edges = np.asarray(edges, dtype=np.float64).ravel()
    if len(edges) != len(counts) + 1:
        raise ValueError(f"{len(edges)} edges for {len(counts)} bins")
    attrs = f' data-bins="{len(counts)}"'
    if len(counts) == 0:
        frame = _Frame((0.0, 1.0), (0.0, 1.0))
        return _document(frame.axes(), attrs)
    top = float(counts.max()) if counts.max() > 0 else 1.0
    frame = _Frame((float(edges[0]), float(edges[-1])), (0.0, top))
    body = frame.axes()
    base = frame.y(0.0)
    for i, cnt in enumerate(counts):
        x_left = frame.x(float(edges[i]))
        x_right = frame.x(float(edges[i + 1]))
        y_top = frame.y(float(cnt))
        body.append(
            f'<rect x="{_fmt(x_left)}" y="{_fmt(y_top)}" '
            f'width="{_fmt(max(x_right - x_left, 0.0))}" '
            f'height="{_fmt(max(base - y_top, 0.0))}" '
            f'fill="#1f77b4" stroke="#ffffff" stroke-width="0.5"/>'
        )
    return _document(body, attrs)
