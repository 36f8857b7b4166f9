"""Standalone SVG line plots and gnuplot-ready data files for curve CSVs."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import DataError, EmptyCurve

WIDTH, HEIGHT = 640, 400
MARGIN = 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def read_curve(path) -> tuple[list[str], list[list[float]]]:
    """Columns of a CSV whose first column is x and remaining columns are y-series."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise EmptyCurve(f"{path}: empty curve file")
    header, body = rows[0], rows[1:]
    if len(header) < 2:
        raise DataError(f"{path}: need an x column and at least one y column")
    if not body:
        raise EmptyCurve(f"{path}: no data points")
    cols = [[] for _ in header]
    for n, r in enumerate(body, 2):
        if len(r) != len(header):
            raise DataError(f"{path} line {n}: {len(r)} fields, expected {len(header)}")
        try:
            for c, v in zip(cols, r):
                c.append(float(v))
        except ValueError:
            raise DataError(f"{path} line {n}: non-numeric value") from None
    return header, cols


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def _finite_range(values: list[float]) -> tuple[float, float]:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    lo, hi = min(finite), max(finite)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def render_svg(header: list[str], cols: list[list[float]], title: str = "") -> str:
    xs = cols[0]
    x0, x1 = _finite_range(xs)
    y0, y1 = _finite_range([v for c in cols[1:] for v in c])
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def py(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="{MARGIN / 2:.1f}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{escape(title)}</text>')
    for t in _ticks(x0, x1):
        out.append(f'<text x="{px(t):.1f}" y="{HEIGHT - MARGIN + 16:.1f}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="10">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN - 6:.1f}" y="{py(t) + 3:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{t:.3g}</text>')
    out.append(f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12:.1f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{escape(header[0])}</text>')
    for k, (name, ys) in enumerate(zip(header[1:], cols[1:])):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys)
                       if math.isfinite(x) and math.isfinite(y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{WIDTH - MARGIN + 4:.1f}" y="{MARGIN + 14 * (k + 1):.1f}" fill="{color}" '
                   f'font-family="sans-serif" font-size="11">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_dat(header: list[str], cols: list[list[float]]) -> str:
    lines = ["# " + " ".join(header)]
    lines += [" ".join(repr(c[i]) for c in cols) for i in range(len(cols[0]))]
    return "\n".join(lines) + "\n"


def emit_plot(curve_path, out_svg=None, out_dat=None, title: str | None = None) -> tuple[Path, Path]:
    """Render a curve CSV to ``<stem>.svg`` and a whitespace-separated ``<stem>.dat``."""
    curve_path = Path(curve_path)
    header, cols = read_curve(curve_path)
    out_svg = Path(out_svg) if out_svg else curve_path.with_suffix(".svg")
    out_dat = Path(out_dat) if out_dat else curve_path.with_suffix(".dat")
    out_svg.write_text(render_svg(header, cols, curve_path.stem if title is None else title))
    out_dat.write_text(render_dat(header, cols))
    return out_svg, out_dat
