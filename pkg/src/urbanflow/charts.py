"""Self-contained SVG bar charts of the mean metrics per route label."""

from __future__ import annotations

from pathlib import Path
from typing import List
from xml.sax.saxutils import escape

from .metrics import LABELS, AggregateReport, EmptyInput, metrics_table

WIDTH = 480
HEIGHT = 320
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 40
MARGIN_BOTTOM = 50
PLOT_W = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
PLOT_H = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

BAR_COLORS = {"Transit": "#d62728", "RideHail": "#1f77b4", "Hybrid1": "#ff7f0e",
              "Hybrid2": "#9467bd"}

CHARTS = (
    ("price", "Price", "BRL", 1.0),
    ("duration", "Travel time", "min", 1 / 60),
    ("wait", "Wait time", "min", 1 / 60),
    ("distance", "Distance", "km", 1 / 1000),
    ("walk_distance", "Walking distance", "km", 1 / 1000),
)


def bar_chart_svg(title: str, unit: str, values: dict) -> str:
    """Bars in LABELS order for the labels present in ``values``."""
    labels = [l for l in LABELS if l in values]
    top = max((values[l] for l in labels), default=0.0)
    slot = PLOT_W / max(1, len(labels))
    bar_w = slot * 0.6
    base_y = MARGIN_TOP + PLOT_H
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="16">'
        f'{escape(title)} ({escape(unit)})</text>',
        f'<line x1="{MARGIN_LEFT}" y1="{base_y}" x2="{MARGIN_LEFT + PLOT_W}" y2="{base_y}" '
        f'stroke="black"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{base_y}" '
        f'stroke="black"/>',
    ]
    for k in range(5):
        frac = k / 4
        y = base_y - frac * PLOT_H
        out.append(f'<text x="{MARGIN_LEFT - 6}" y="{y + 4:.1f}" text-anchor="end" '
                   f'font-size="11">{top * frac:.2f}</text>')
    for i, label in enumerate(labels):
        v = values[label]
        h = v / top * PLOT_H if top > 0 else 0.0
        x = MARGIN_LEFT + i * slot + (slot - bar_w) / 2
        out.append(
            f'<rect class="bar" data-label="{label}" data-value="{v!r}" x="{x:.3f}" '
            f'y="{base_y - h:.3f}" width="{bar_w:.3f}" height="{h:.3f}" '
            f'fill="{BAR_COLORS[label]}"/>'
        )
        out.append(f'<text x="{x + bar_w / 2:.3f}" y="{base_y - h - 4:.3f}" '
                   f'text-anchor="middle" font-size="11">{v:.2f}</text>')
        out.append(f'<text x="{x + bar_w / 2:.3f}" y="{base_y + 18}" '
                   f'text-anchor="middle" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_charts(report: AggregateReport, out_dir) -> List[Path]:
    """One chart per metric, written as ``<metric>.svg``."""
    table = metrics_table(report)
    if not any(table.values()):
        raise EmptyInput("report has no labels to chart")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for metric, title, unit, scale in CHARTS:
        values = {l: v * scale for l, v in table[metric].items()}
        path = out_dir / f"{metric}.svg"
        path.write_text(bar_chart_svg(title, unit, values), encoding="utf-8")
        paths.append(path)
    return paths
