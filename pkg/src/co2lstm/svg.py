"""Minimal standalone SVG charts with the plotted data embedded as comments."""

from __future__ import annotations

import json
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 360
MARGIN = 50
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd")


def _header(title: str, meta: dict | None) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    if meta:
        out.append(f"<!-- meta {json.dumps(meta, sort_keys=True).replace('--', '- -')} -->")
    return out


def _axes() -> list[str]:
    x0, y0, x1, y1 = MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2, MARGIN
    return [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]


def bar_chart(labels, values, title: str = "", ylabel: str = "", meta: dict | None = None) -> str:
    values = [float(v) for v in values]
    top = max(max(values), 1e-12)
    plot_w = WIDTH - 1.5 * MARGIN
    plot_h = HEIGHT - 2 * MARGIN
    slot = plot_w / max(len(values), 1)
    parts = _header(title, meta)
    parts.append(f"<!-- data {json.dumps({'labels': list(labels), 'values': values})} -->")
    parts += _axes()
    for k, (label, v) in enumerate(zip(labels, values)):
        h = plot_h * v / top
        x = MARGIN + k * slot + 0.15 * slot
        y = HEIGHT - MARGIN - h
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{0.7 * slot:.2f}" height="{h:.2f}" '
            f'fill="{PALETTE[k % len(PALETTE)]}"/>'
        )
        parts.append(f'<text x="{x + 0.35 * slot:.2f}" y="{y - 4:.2f}" text-anchor="middle">{v:.5f}</text>')
        parts.append(
            f'<text x="{x + 0.35 * slot:.2f}" y="{HEIGHT - MARGIN + 14}" text-anchor="middle">{escape(str(label))}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="14" y="{HEIGHT / 2}" transform="rotate(-90 14 {HEIGHT / 2})" '
            f'text-anchor="middle">{escape(ylabel)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_chart(series: dict, title: str = "", meta: dict | None = None) -> str:
    """``series`` maps a legend name to ``(xs, ys)`` with numeric xs."""
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys]
    parts = _header(title, meta)
    parts += _axes()
    if not xs_all:
        parts.append("</svg>")
        return "\n".join(parts) + "\n"
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    plot_w = WIDTH - 1.5 * MARGIN
    plot_h = HEIGHT - 2 * MARGIN
    for k, (name, (xs, ys)) in enumerate(series.items()):
        pts = " ".join(
            f"{MARGIN + plot_w * (x - x_lo) / x_span:.2f},{HEIGHT - MARGIN - plot_h * (y - y_lo) / y_span:.2f}"
            for x, y in zip(xs, ys)
        )
        color = PALETTE[k % len(PALETTE)]
        parts.append(f"<!-- series {json.dumps(name)} {json.dumps([list(map(float, xs)), list(map(float, ys))])} -->")
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        parts.append(f'<text x="{WIDTH - 160}" y="{40 + 14 * k}" fill="{color}">{escape(name)}</text>')
    parts.append(f'<text x="{MARGIN - 4}" y="{HEIGHT - MARGIN}" text-anchor="end">{y_lo:.3g}</text>')
    parts.append(f'<text x="{MARGIN - 4}" y="{MARGIN + 4}" text-anchor="end">{y_hi:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
