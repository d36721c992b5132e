"""File writers: JSON with a metadata block, barcode CSV and SVG, text reports.

Every writer takes the resolved run configuration and embeds it, so a
file on its own says how it was produced. Nothing time-dependent goes
into these files; identical configurations give byte-identical output.

Barcode SVG layout (all lengths in px):

=================  =====  ================================================
``MARGIN``         40     space left of the axis and above the first bar
``WIDTH``          640    length of the scale axis
``BAR_HEIGHT``     6      thickness of one interval
``BAR_GAP``        4      gap between intervals
``GROUP_GAP``      24     extra gap and label room between dimensions
=================  =====  ================================================

Infinite bars run to the right end of the axis and end in an arrowhead.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .persistence import Barcode, BettiCurve

MARGIN = 40
WIDTH = 640
BAR_HEIGHT = 6
BAR_GAP = 4
GROUP_GAP = 24
COLOURS = ("#1f77b4", "#d62728", "#2ca02c")


def dumps(payload: dict, metadata: dict) -> str:
    return json.dumps({"metadata": metadata, **payload}, indent=1, allow_nan=False) + "\n"


def comment_block(metadata: dict) -> str:
    return "".join(f"# {line}\n" for line in json.dumps(metadata, sort_keys=True).splitlines())


def write_json(path, payload: dict, metadata: dict) -> None:
    Path(path).write_text(dumps(payload, metadata))


def write_text(path, body: str, metadata: dict) -> None:
    Path(path).write_text(comment_block(metadata) + body)


def betti_report(betti: list[int]) -> str:
    return "".join(f"beta_{p} = {b}\n" for p, b in enumerate(betti))


def selection_report(curve: BettiCurve) -> str:
    """For each Betti value seen on the curve, the longest run of scales showing it."""
    lines = [f"dim = {curve.dim}", "scale,betti"]
    lines += [f"{s!r},{b}" for s, b in curve.samples]
    lines.append("value,first_scale,last_scale")
    for value in sorted(curve.value_ranges()):
        lo, hi = curve.longest_range(value)
        lines.append(f"{value},{lo!r},{hi!r}")
    return "\n".join(lines) + "\n"


def parse_selection(text: str) -> dict[int, tuple[float, float]]:
    """Read back the ``value,first_scale,last_scale`` table of a selection report."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    start = lines.index("value,first_scale,last_scale") + 1
    out = {}
    for ln in lines[start:]:
        v, lo, hi = ln.split(",")
        out[int(v)] = (float(lo), float(hi))
    return out


def barcode_svg(barcode: Barcode, scales, metadata: dict | None = None) -> str:
    scales = [float(s) for s in scales]
    finite = [x for iv in barcode for x in (iv.birth, iv.death) if not math.isinf(x)]
    lo = min(scales + finite)
    hi = max(scales + finite)
    span = hi - lo or 1.0

    def x(value):
        if math.isinf(value):
            return MARGIN + WIDTH
        return MARGIN + WIDTH * (value - lo) / span

    rows = []
    y = MARGIN
    dims = sorted({iv.dim for iv in barcode})
    for d in dims:
        rows.append(f'<text x="4" y="{y + BAR_HEIGHT}" font-size="10">H{d}</text>')
        for iv in sorted(barcode.in_dim(d), key=lambda iv: (iv.birth, iv.death)):
            x0, x1 = x(iv.birth), x(iv.death)
            colour = COLOURS[d % len(COLOURS)]
            rows.append(
                f'<rect x="{x0:.2f}" y="{y}" width="{max(x1 - x0, 1.0):.2f}" height="{BAR_HEIGHT}" fill="{colour}"/>'
            )
            if iv.infinite:
                tip = MARGIN + WIDTH
                rows.append(
                    f'<polygon points="{tip},{y - 2} {tip + 8},{y + BAR_HEIGHT / 2} {tip},{y + BAR_HEIGHT + 2}" fill="{colour}"/>'
                )
            y += BAR_HEIGHT + BAR_GAP
        y += GROUP_GAP
    axis_y = y
    rows.append(f'<line x1="{MARGIN}" y1="{axis_y}" x2="{MARGIN + WIDTH}" y2="{axis_y}" stroke="black"/>')
    for s in scales:
        rows.append(f'<line x1="{x(s):.2f}" y1="{axis_y}" x2="{x(s):.2f}" y2="{axis_y + 4}" stroke="black"/>')
        rows.append(f'<text x="{x(s):.2f}" y="{axis_y + 16}" font-size="9" text-anchor="middle">{s:g}</text>')
    height = axis_y + 2 * MARGIN
    width = WIDTH + 2 * MARGIN
    meta = f"<metadata>{escape(json.dumps(metadata, sort_keys=True))}</metadata>\n" if metadata is not None else ""
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">\n'
        + meta
        + "\n".join(rows)
        + "\n</svg>\n"
    )
