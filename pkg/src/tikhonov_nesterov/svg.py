"""Minimal static SVG line charts (polyline per series, optional log y)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=80, right=170, top=40, bottom=50)


def _num(v: float) -> str:
    return f"{v:.2f}"


def line_chart(series: dict, path, title: str = "", xlabel: str = "k", ylabel: str = "",
               logy: bool = False, dashed=()):
    """Write ``series`` (name -> (x, y)) as an SVG file.

    With ``logy`` nonpositive points are dropped and the rest joined in order.
    """
    cleaned = {}
    for name, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logy:
            keep &= y > 0
        if keep.any():
            cleaned[name] = (x[keep], np.log10(y[keep]) if logy else y[keep])
    plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    if cleaned:
        xs = np.concatenate([v[0] for v in cleaned.values()])
        ys = np.concatenate([v[1] for v in cleaned.values()])
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = float(ys.min()), float(ys.max())
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * plot_w

    def py(v):
        return MARGIN["top"] + (1.0 - (v - y0) / (y1 - y0)) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>',
    ]
    for t in np.linspace(x0, x1, 6):
        out.append(f'<text x="{_num(px(t))}" y="{HEIGHT - MARGIN["bottom"] + 18}" '
                   f'text-anchor="middle">{t:.4g}</text>')
    if logy:
        ticks = range(math.floor(y0), math.ceil(y1) + 1)
        step = max(1, len(ticks) // 8)
        ticks = [t for t in ticks if y0 <= t <= y1][::step] or [y0, y1]
        labels = [f"1e{int(t)}" if float(t).is_integer() else f"{10 ** t:.3g}" for t in ticks]
    else:
        ticks = list(np.linspace(y0, y1, 6))
        labels = [f"{t:.4g}" for t in ticks]
    for t, lab in zip(ticks, labels):
        out.append(f'<line x1="{MARGIN["left"] - 4}" x2="{MARGIN["left"]}" y1="{_num(py(t))}" '
                   f'y2="{_num(py(t))}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{_num(py(t) + 4)}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{MARGIN["left"] + plot_w / 2}" y="{HEIGHT - 10}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{MARGIN["top"] + plot_h / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN["top"] + plot_h / 2})">{escape(ylabel)}</text>')
    for i, (name, (x, y)) in enumerate(cleaned.items()):
        colour = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_num(px(a))},{_num(py(b))}" for a, b in zip(x, y))
        dash = ' stroke-dasharray="6 4"' if name in dashed else ""
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{pts}"/>')
        ly = MARGIN["top"] + 14 + 18 * i
        lx = WIDTH - MARGIN["right"] + 12
        out.append(f'<line x1="{lx}" x2="{lx + 22}" y1="{ly - 4}" y2="{ly - 4}" stroke="{colour}" '
                   f'stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 28}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
