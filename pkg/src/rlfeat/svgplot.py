"""Minimal static SVG 1.1 figures: line plots and heatmaps.

Hand-rolled on purpose: the outputs are small, self-contained, and byte-
deterministic (fixed palette, fixed coordinate formatting, no timestamps),
so identical sweeps rerun to identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

WIDTH = 720
HEIGHT = 480
MARGIN_LEFT = 70
MARGIN_RIGHT = 24
MARGIN_TOP = 42
MARGIN_BOTTOM = 52

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
BOUNDARY_COLOR = "#888888"

# five-stop blue->yellow ramp for heatmap cells
_RAMP = (
    (68, 1, 84),
    (59, 82, 139),
    (33, 145, 140),
    (94, 201, 98),
    (253, 231, 37),
)


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _esc(text):
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


class _Axis:
    """Maps data coordinates to pixel coordinates, optionally log-scaled."""

    def __init__(self, lo, hi, pix_lo, pix_hi, log=False):
        if log:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi <= lo:
            hi = lo + 1.0
        self.lo, self.hi = lo, hi
        self.pix_lo, self.pix_hi = pix_lo, pix_hi
        self.log = log

    def __call__(self, v):
        t = v
        if self.log:
            if v <= 0:
                return math.nan
            t = math.log10(v)
        frac = (t - self.lo) / (self.hi - self.lo)
        return self.pix_lo + frac * (self.pix_hi - self.pix_lo)

    def ticks(self):
        if self.log:
            first = math.ceil(self.lo - 1e-9)
            last = math.floor(self.hi + 1e-9)
            return [10.0**k for k in range(first, last + 1)]
        span = self.hi - self.lo
        if span <= 0:
            return [self.lo]
        return [self.lo + span * k / 4.0 for k in range(5)]

    def contains(self, v):
        t = math.log10(v) if self.log else v
        return self.lo - 1e-9 <= t <= self.hi + 1e-9


def _tick_label(v):
    if v == 0:
        return "0"
    magnitude = abs(v)
    if 1e-3 <= magnitude < 1e4:
        return f"{v:.4g}"
    return f"{v:.1e}"


@dataclass(frozen=True)
class Series:
    """One plotted curve; stderr (if given) draws +-1 SE whiskers."""

    label: str
    xs: tuple
    ys: tuple
    stderr: tuple = None
    markers: bool = False


def _finite_segments(xs, ys, x_axis, y_axis):
    """Split a curve at non-finite or un-mappable points."""
    segments = []
    current = []
    for x, y in zip(xs, ys):
        px, py = x_axis(x), y_axis(y)
        if math.isfinite(px) and math.isfinite(py):
            current.append((px, py))
        elif current:
            segments.append(current)
            current = []
    if current:
        segments.append(current)
    return segments


def _data_range(values, log):
    finite = [v for v in values if v is not None and math.isfinite(v)]
    if log:
        finite = [v for v in finite if v > 0]
    if not finite:
        return (0.1, 1.0) if log else (0.0, 1.0)
    lo, hi = min(finite), max(finite)
    if log:
        return lo / 1.2, hi * 1.2
    pad = 0.05 * (hi - lo) if hi > lo else max(abs(hi), 1.0) * 0.1
    return lo - pad, hi + pad


def _frame(parts, x_axis, y_axis, title, xlabel, ylabel):
    x0, x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    y0, y1 = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    parts.append(
        f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" '
        'fill="none" stroke="#222222" stroke-width="1"/>'
    )
    for tick in x_axis.ticks():
        px = x_axis(tick)
        if not math.isfinite(px):
            continue
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{y1}" x2="{_fmt(px)}" y2="{y1 + 5}" '
            'stroke="#222222" stroke-width="1"/>'
        )
        label = _tick_label(tick)
        parts.append(
            f'<text x="{_fmt(px)}" y="{y1 + 18}" font-size="11" '
            f'text-anchor="middle" fill="#222222">{_esc(label)}</text>'
        )
    for tick in y_axis.ticks():
        value = 10.0**tick if y_axis.log else tick
        py = y_axis(value)
        if not math.isfinite(py):
            continue
        parts.append(
            f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" '
            'stroke="#222222" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" font-size="11" '
            f'text-anchor="end" fill="#222222">{_esc(_tick_label(value))}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 14}" font-size="13" '
        f'text-anchor="middle" fill="#222222">{_esc(xlabel)}</text>'
    )
    parts.append(
        f'<text x="18" y="{(y0 + y1) // 2}" font-size="13" text-anchor="middle" '
        f'fill="#222222" transform="rotate(-90 18 {(y0 + y1) // 2})">'
        f"{_esc(ylabel)}</text>"
    )
    parts.append(
        f'<text x="{(x0 + x1) // 2}" y="24" font-size="15" text-anchor="middle" '
        f'fill="#111111">{_esc(title)}</text>'
    )


def line_plot(
    path,
    series,
    *,
    title="",
    xlabel="",
    ylabel="",
    xlog=False,
    ylog=False,
    vlines=(),
):
    """Render curves to an SVG file (skipped when path is None) and return the text.

    ``vlines`` draws dashed vertical markers (phase boundaries); points where
    a series is non-finite split the polyline into separate segments.
    """
    all_x = [x for s in series for x in s.xs]
    all_y = [y for s in series for y in s.ys if y is not None]
    x_lo, x_hi = _data_range(all_x, xlog)
    y_lo, y_hi = _data_range(all_y, ylog)
    x_axis = _Axis(x_lo, x_hi, MARGIN_LEFT, WIDTH - MARGIN_RIGHT, log=xlog)
    y_axis = _Axis(y_lo, y_hi, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP, log=ylog)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    _frame(parts, x_axis, y_axis, title, xlabel, ylabel)
    for position in vlines:
        if not x_axis.contains(position):
            continue
        px = x_axis(position)
        if not math.isfinite(px):
            continue
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{MARGIN_TOP}" x2="{_fmt(px)}" '
            f'y2="{HEIGHT - MARGIN_BOTTOM}" stroke="{BOUNDARY_COLOR}" '
            'stroke-width="1" stroke-dasharray="4 3"/>'
        )
    for index, one in enumerate(series):
        color = PALETTE[index % len(PALETTE)]
        if one.stderr is not None:
            for x, y, se in zip(one.xs, one.ys, one.stderr):
                if y is None or se is None:
                    continue
                px = x_axis(x)
                y_low, y_high = y_axis(y - se), y_axis(y + se)
                if not all(map(math.isfinite, (px, y_low, y_high))):
                    continue
                parts.append(
                    f'<line x1="{_fmt(px)}" y1="{_fmt(y_low)}" '
                    f'x2="{_fmt(px)}" y2="{_fmt(y_high)}" '
                    f'stroke="{color}" stroke-width="1"/>'
                )
        ys = [math.nan if y is None else y for y in one.ys]
        for segment in _finite_segments(one.xs, ys, x_axis, y_axis):
            if len(segment) == 1 or one.markers:
                for px, py in segment:
                    parts.append(
                        f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="2.5" '
                        f'fill="{color}"/>'
                    )
            if len(segment) > 1 and not one.markers:
                coords = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in segment)
                parts.append(
                    f'<polyline points="{coords}" fill="none" '
                    f'stroke="{color}" stroke-width="1.5"/>'
                )
        legend_y = MARGIN_TOP + 16 + 16 * index
        parts.append(
            f'<rect x="{WIDTH - 170}" y="{legend_y - 9}" width="12" '
            f'height="12" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{WIDTH - 152}" y="{legend_y + 1}" font-size="11" '
            f'fill="#222222">{_esc(one.label)}</text>'
        )
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    return text


def _ramp_color(frac):
    frac = min(1.0, max(0.0, frac))
    scaled = frac * (len(_RAMP) - 1)
    low = min(int(scaled), len(_RAMP) - 2)
    t = scaled - low
    rgb = [
        round(_RAMP[low][k] + t * (_RAMP[low + 1][k] - _RAMP[low][k]))
        for k in range(3)
    ]
    return f"#{rgb[0]:02x}{rgb[1]:02x}{rgb[2]:02x}"


def _cell_edges(centers, log):
    """Cell boundaries halfway (geometrically for log axes) between centers."""
    if len(centers) == 1:
        c = centers[0]
        return [c * 0.9, c * 1.1] if log else [c - 0.5, c + 0.5]
    edges = []
    if log:
        ratio = centers[1] / centers[0]
        edges.append(centers[0] / math.sqrt(ratio))
        for a, b in zip(centers, centers[1:]):
            edges.append(math.sqrt(a * b))
        ratio = centers[-1] / centers[-2]
        edges.append(centers[-1] * math.sqrt(ratio))
    else:
        step = centers[1] - centers[0]
        edges.append(centers[0] - step / 2.0)
        for a, b in zip(centers, centers[1:]):
            edges.append((a + b) / 2.0)
        edges.append(centers[-1] + step / 2.0)
    return edges


def heatmap(
    path,
    xs,
    ys,
    values,
    *,
    title="",
    xlabel="",
    ylabel="",
    xlog=True,
    ylog=True,
    boundaries=True,
):
    """Render a grid of values (rows indexed by ys) with boundary overlays.

    Writes to ``path`` unless it is None; returns the SVG text either way.

    Non-finite cells render grey.  Overlays mark the phase boundaries: the
    vertical line x=1, the horizontal line y=1, and the diagonal y=x.
    """
    x_edges = _cell_edges(list(xs), xlog)
    y_edges = _cell_edges(list(ys), ylog)
    x_axis = _Axis(
        x_edges[0], x_edges[-1], MARGIN_LEFT, WIDTH - MARGIN_RIGHT, log=xlog
    )
    y_axis = _Axis(
        y_edges[0], y_edges[-1], HEIGHT - MARGIN_BOTTOM, MARGIN_TOP, log=ylog
    )
    finite = [
        v for row in values for v in row if v is not None and math.isfinite(v)
    ]
    v_lo = min(finite) if finite else 0.0
    v_hi = max(finite) if finite else 1.0
    span = v_hi - v_lo if v_hi > v_lo else 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    for iy, row in enumerate(values):
        for ix, value in enumerate(row):
            left = x_axis(x_edges[ix])
            right = x_axis(x_edges[ix + 1])
            top = y_axis(y_edges[iy + 1])
            bottom = y_axis(y_edges[iy])
            if value is None or not math.isfinite(value):
                color = "#cccccc"
            else:
                color = _ramp_color((value - v_lo) / span)
            parts.append(
                f'<rect x="{_fmt(left)}" y="{_fmt(top)}" '
                f'width="{_fmt(right - left)}" height="{_fmt(bottom - top)}" '
                f'fill="{color}"/>'
            )
    if boundaries:
        for position, vertical in ((1.0, True), (1.0, False)):
            axis = x_axis if vertical else y_axis
            if not axis.contains(position):
                continue
            p = axis(position)
            if vertical:
                line = (
                    f'<line x1="{_fmt(p)}" y1="{MARGIN_TOP}" x2="{_fmt(p)}" '
                    f'y2="{HEIGHT - MARGIN_BOTTOM}"'
                )
            else:
                line = (
                    f'<line x1="{MARGIN_LEFT}" y1="{_fmt(p)}" '
                    f'x2="{WIDTH - MARGIN_RIGHT}" y2="{_fmt(p)}"'
                )
            parts.append(
                f"{line} "
                f'stroke="#ffffff" stroke-width="1.5" stroke-dasharray="5 3"/>'
            )
        diag = [
            (x_axis(v), y_axis(v))
            for v in sorted(set(list(xs) + list(ys)))
            if x_axis.contains(v) and y_axis.contains(v)
        ]
        if len(diag) > 1:
            coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in diag)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="#ffffff" '
                'stroke-width="1.5" stroke-dasharray="5 3"/>'
            )
    _frame(parts, x_axis, y_axis, title, xlabel, ylabel)
    bar_x = WIDTH - MARGIN_RIGHT + 6
    steps = 24
    bar_top, bar_bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    for k in range(steps):
        frac_hi = 1.0 - k / steps
        y_top = bar_top + (bar_bottom - bar_top) * k / steps
        height = (bar_bottom - bar_top) / steps
        parts.append(
            f'<rect x="{bar_x}" y="{_fmt(y_top)}" width="10" '
            f'height="{_fmt(height + 0.5)}" fill="{_ramp_color(frac_hi)}"/>'
        )
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    return text
