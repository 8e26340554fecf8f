"""Minimal semi-log line plots written directly as SVG.

No plotting dependency: the harness draws its two figures itself so that
the files are a pure, deterministic function of the CSV data they come
from (byte-identical on re-render).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["semilog_svg"]

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 200, 40, 60

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)

FLOOR = 1e-300  # keep log10 finite on exact zeros


def _fmt(v):
    return f"{v:.2f}"


def _tick_label(exp):
    return f"1e{exp:d}"


def semilog_svg(path, series, xlabel, ylabel, title):
    """Write a semi-log (log y, linear x) line plot.

    series is a list of (label, x_array, y_array); y values are clamped
    below at a tiny positive floor before taking log10.
    """
    if not series:
        raise ValueError("nothing to plot")
    xs_all = np.concatenate([np.asarray(x, dtype=float) for _, x, _ in series])
    ys_all = np.concatenate(
        [np.maximum(np.asarray(y, dtype=float), FLOOR) for _, _, y in series]
    )
    x_lo, x_hi = float(xs_all.min()), float(xs_all.max())
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    ly_all = np.log10(ys_all)
    e_lo = int(math.floor(ly_all.min()))
    e_hi = int(math.ceil(ly_all.max()))
    if e_hi <= e_lo:
        e_hi = e_lo + 1

    px0, px1 = MARGIN_L, WIDTH - MARGIN_R
    py0, py1 = HEIGHT - MARGIN_B, MARGIN_T

    def sx(x):
        return px0 + (x - x_lo) / (x_hi - x_lo) * (px1 - px0)

    def sy(ly):
        return py0 + (ly - e_lo) / (e_hi - e_lo) * (py1 - py0)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{(px0 + px1) / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
    ]

    # y grid: one line per decade (thin out the labels if there are many)
    n_dec = e_hi - e_lo
    label_step = max(1, n_dec // 10)
    for e in range(e_lo, e_hi + 1):
        y = sy(e)
        out.append(
            f'<line x1="{px0}" y1="{_fmt(y)}" x2="{px1}" y2="{_fmt(y)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        if (e - e_lo) % label_step == 0:
            out.append(
                f'<text x="{px0 - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
                f'font-family="sans-serif" font-size="11">{_tick_label(e)}</text>'
            )
    # x grid: 6 evenly spaced ticks
    for t in range(7):
        xv = x_lo + t * (x_hi - x_lo) / 6.0
        x = sx(xv)
        out.append(
            f'<line x1="{_fmt(x)}" y1="{py0}" x2="{_fmt(x)}" y2="{py1}" '
            f'stroke="#eeeeee" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(x)}" y="{py0 + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{xv:.6g}</text>'
        )

    out.append(
        f'<rect x="{px0}" y="{py1}" width="{px1 - px0}" height="{py0 - py1}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{(px0 + px1) / 2:.0f}" y="{HEIGHT - 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>'
    )
    out.append(
        f'<text x="20" y="{(py0 + py1) / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {(py0 + py1) / 2:.0f})">{ylabel}</text>'
    )

    for idx, (label, x, y) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        x = np.asarray(x, dtype=float)
        ly = np.log10(np.maximum(np.asarray(y, dtype=float), FLOOR))
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, ly))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly_leg = MARGIN_T + 16 + 18 * idx
        out.append(
            f'<line x1="{px1 + 12}" y1="{ly_leg - 4}" x2="{px1 + 40}" y2="{ly_leg - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{px1 + 46}" y="{ly_leg}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )

    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
