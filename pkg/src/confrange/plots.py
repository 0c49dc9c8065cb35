"""Standalone SVG rendering of per-case performance ranges."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .errors import EmptyTestSet

QUALITY_COLORS = {"high": "#2ca02c", "low": "#d62728"}
UNKNOWN_COLOR = "#1f77b4"
BAND_COLOR = "#bbbbbb"
TRUE_COLOR = "#000000"

WIDTH, HEIGHT = 800, 400
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 30, 50


def sort_cases(records) -> list:
    """Descending ground-truth DSC, ties broken by image id."""
    return sorted(records, key=lambda r: (-r.y_true, r.image_id))


def case_plot_svg(records, title: str = "Predicted performance ranges") -> str:
    records = sort_cases(records)
    if not records:
        raise EmptyTestSet("nothing to plot")
    n = len(records)
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM
    step = plot_w / n
    band_w = max(step * 0.8, 0.5)
    radius = max(min(step * 0.3, 3.0), 0.6)

    def ypos(v: float) -> float:
        v = min(max(v, 0.0), 1.0)
        return TOP + (1.0 - v) * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
        f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]

    # axes, y ticks every 0.2
    x0, x1, y0, y1 = LEFT, WIDTH - RIGHT, TOP, TOP + plot_h
    out.append(f'<g id="axes" stroke="#000000" stroke-width="1">')
    out.append(f'<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>')
    out.append("</g>")
    out.append('<g id="ticks" font-family="sans-serif" font-size="11" text-anchor="end">')
    for i in range(6):
        v = i / 5
        y = ypos(v)
        out.append(f'<line x1="{x0 - 4}" y1="{y:.2f}" x2="{x0}" y2="{y:.2f}" stroke="#000000"/>')
        out.append(f'<text x="{x0 - 7}" y="{y + 4:.2f}">{v:.1f}</text>')
    out.append("</g>")
    out.append(
        f'<text x="{LEFT + plot_w / 2:.1f}" y="{HEIGHT - 15}" font-family="sans-serif" font-size="13" '
        f'text-anchor="middle">cases sorted by ground-truth DSC (descending)</text>'
    )
    out.append(
        f'<text x="15" y="{TOP + plot_h / 2:.1f}" font-family="sans-serif" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 15 {TOP + plot_h / 2:.1f})">DSC</text>'
    )
    out.append(
        f'<text x="{LEFT + plot_w / 2:.1f}" y="18" font-family="sans-serif" font-size="14" '
        f'text-anchor="middle">{escape(title)}</text>'
    )

    bands, truths, preds = [], [], []
    for i, r in enumerate(records):
        cx = LEFT + (i + 0.5) * step
        top, bottom = ypos(r.upper), ypos(r.lower)
        cid = escape(r.image_id, {'"': "&quot;"})
        bands.append(
            f'<rect class="range" data-id="{cid}" x="{cx - band_w / 2:.2f}" y="{top:.2f}" '
            f'width="{band_w:.2f}" height="{max(bottom - top, 0.5):.2f}" fill="{BAND_COLOR}"/>'
        )
        truths.append(
            f'<circle class="y-true" data-id="{cid}" cx="{cx:.2f}" cy="{ypos(r.y_true):.2f}" '
            f'r="{radius:.2f}" fill="{TRUE_COLOR}"/>'
        )
        color = QUALITY_COLORS.get(r.quality_label, UNKNOWN_COLOR)
        preds.append(
            f'<circle class="y-hat" data-id="{cid}" data-quality="{escape(r.quality_label)}" '
            f'cx="{cx:.2f}" cy="{ypos(r.y_hat):.2f}" r="{radius:.2f}" fill="{color}"/>'
        )
    out += ['<g id="ranges">', *bands, "</g>"]
    out += ['<g id="ground-truth">', *truths, "</g>"]
    out += ['<g id="estimates">', *preds, "</g>"]
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_case_plot(records, path_svg, title: str = "Predicted performance ranges") -> None:
    svg = case_plot_svg(records, title)
    with open(path_svg, "w", encoding="utf-8") as fh:
        fh.write(svg)
