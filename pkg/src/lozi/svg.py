"""Minimal SVG figures in mathematical orientation.

Data coordinates are mapped to pixels with the y-axis flipped, and the
viewBox is fixed by the data bounds plus a 5% margin, so the same data
always gives the same file.
"""
from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from typing import List, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

MARGIN = 0.05


def _num(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


@dataclass
class Figure:
    """Collects layers in data coordinates and renders them in one pass.

    ``equal_aspect=False`` scales x and y separately to fill ``width`` by
    ``height``; use it when the two axes carry different quantities.
    """
    width: float = 800.0
    height: Optional[float] = None
    equal_aspect: bool = True
    title: Optional[str] = None
    _items: List[tuple] = field(default_factory=list)
    _pts: List[np.ndarray] = field(default_factory=list)

    def _add(self, kind, data, style):
        data = np.asarray(data, dtype=float).reshape(-1, 2)
        if len(data):
            self._pts.append(data)
        self._items.append((kind, data, style))

    def polygon(self, verts, stroke="black", fill="none", opacity=1.0, width=1.0):
        self._add("polygon", verts, dict(stroke=stroke, fill=fill, opacity=opacity, width=width))

    def polyline(self, verts, stroke="black", width=1.0, dash=None):
        self._add("polyline", verts, dict(stroke=stroke, width=width, dash=dash))

    def segments(self, segs, stroke="black", width=1.0):
        segs = np.asarray(segs, dtype=float).reshape(-1, 2, 2)
        self._add("segments", segs.reshape(-1, 2), dict(stroke=stroke, width=width))

    def dots(self, pts, color="black", r=0.5):
        self._add("dots", pts, dict(color=color, r=r))

    def label(self, z, text, color="black", size=12):
        self._add("label", [z], dict(text=text, color=color, size=size))

    def _transform(self):
        allp = np.vstack(self._pts) if self._pts else np.zeros((1, 2))
        lo, hi = allp.min(axis=0), allp.max(axis=0)
        span = np.where(hi - lo > 0, hi - lo, 1.0)
        lo, hi = lo - MARGIN * span, hi + MARGIN * span
        span = hi - lo
        W = self.width
        if self.equal_aspect:
            sx = sy = W / span[0]
            H = span[1] * sy
        else:
            H = self.height or 0.75 * W
            sx, sy = W / span[0], H / span[1]
        def to_px(v):
            v = np.atleast_2d(v)
            return np.column_stack([(v[:, 0] - lo[0]) * sx, (hi[1] - v[:, 1]) * sy])
        return to_px, W, H

    def render(self, timestamp: bool = True) -> str:
        to_px, W, H = self._transform()
        out = ['<?xml version="1.0" encoding="UTF-8"?>']
        if timestamp:
            now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
            out.append(f"<!-- generated {now} -->")
        out.append(f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_num(W)} {_num(H)}" '
                   f'width="{_num(W)}" height="{_num(H)}">')
        out.append(f'<rect x="0" y="0" width="{_num(W)}" height="{_num(H)}" fill="white"/>')
        if self.title:
            out.append(f"<title>{escape(self.title)}</title>")
        for kind, data, st in self._items:
            px = to_px(data) if len(data) else data
            if kind in ("polygon", "polyline"):
                pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in px)
                if kind == "polygon":
                    out.append(f'<polygon points="{pts}" stroke="{st["stroke"]}" fill="{st["fill"]}" '
                               f'fill-opacity="{st["opacity"]}" stroke-width="{st["width"]}"/>')
                else:
                    dash = f' stroke-dasharray="{st["dash"]}"' if st["dash"] else ""
                    out.append(f'<polyline points="{pts}" stroke="{st["stroke"]}" fill="none" '
                               f'stroke-width="{st["width"]}"{dash}/>')
            elif kind == "segments":
                d = " ".join(f"M{_num(a[0])} {_num(a[1])}L{_num(b[0])} {_num(b[1])}"
                             for a, b in px.reshape(-1, 2, 2))
                out.append(f'<path d="{d}" stroke="{st["stroke"]}" fill="none" '
                           f'stroke-width="{st["width"]}"/>')
            elif kind == "dots":
                out.append(f'<g fill="{st["color"]}">')
                r = _num(st["r"])
                out.extend(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{r}"/>' for x, y in px)
                out.append("</g>")
            elif kind == "label":
                x, y = px[0]
                out.append(f'<text x="{_num(x + 4)}" y="{_num(y - 4)}" fill="{st["color"]}" '
                           f'font-size="{st["size"]}" font-family="sans-serif">'
                           f'{escape(st["text"])}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def axis_ticks(lo: float, hi: float, count: int = 5) -> Sequence[float]:
    return list(np.linspace(lo, hi, count))
