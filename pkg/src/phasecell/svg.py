"""Minimal SVG 1.1 line art for curves and annulus boundaries."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

VIEW = 900

DEFAULT_STYLE = {"stroke": "#1f3b73", "stroke-width": "1", "fill": "none"}


def _attrs(style: dict) -> str:
    return " ".join(f'{k}="{v}"' for k, v in style.items())


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def render_svg(polyline=None, circles: Sequence[float] | None = None, style: dict | None = None) -> str:
    """SVG text for a polyline in the unit square or for circles about the origin.

    The polyline case maps [0, 1]^2 onto a 900x900 viewBox with y pointing up.
    Circles are drawn in the bounding box of the largest radius.
    """
    style = {**DEFAULT_STYLE, **(style or {})}
    pts = None if polyline is None else np.asarray(polyline, dtype=float)
    radii = [] if circles is None else [float(r) for r in circles]
    if (pts is None or pts.size == 0) and not radii:
        raise ValueError("nothing to draw: geometry is empty")

    body = []
    if radii:
        extent = max(radii)
        scale = VIEW / (2 * extent)
        to_view = lambda x, y: ((x + extent) * scale, (extent - y) * scale)  # noqa: E731
        for r in radii:
            cx, cy = to_view(0.0, 0.0)
            body.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r * scale)}" {_attrs(style)}/>')
    else:
        to_view = lambda x, y: (x * VIEW, (1.0 - y) * VIEW)  # noqa: E731
    if pts is not None and pts.size:
        coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in (to_view(x, y) for x, y in pts))
        body.append(f'<polyline points="{coords}" {_attrs(style)}/>')

    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{VIEW}" height="{VIEW}" '
        f'viewBox="0 0 {VIEW} {VIEW}">\n' + "\n".join(body) + "\n</svg>\n"
    )


def emit_svg(path, polyline=None, circles=None, style=None) -> Path:
    text = render_svg(polyline, circles, style)
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path


def annulus_boundaries(M: int, n: int) -> tuple[float, float]:
    """Inner and outer radii of the wound annulus."""
    return math.sqrt(2 * n + 1), math.sqrt(2 * n + 1 + 1 / (M * math.pi))
