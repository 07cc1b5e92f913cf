"""Minimal deterministic SVG emission for domains, cracks, images and meshes.

Hand-rolled rather than a plotting library so identical invocations produce
byte-identical files.
"""
from __future__ import annotations

import numpy as np


def _fmt(x):
    return f"{x:.6g}"


class SvgCanvas:
    def __init__(self, bounds, size=480, pad=0.05):
        (x0, y0), (x1, y1) = bounds
        w = max(x1 - x0, 1e-12)
        h = max(y1 - y0, 1e-12)
        m = pad * max(w, h)
        self.x0, self.y0 = x0 - m, y0 - m
        self.w, self.h = w + 2 * m, h + 2 * m
        self.size = size
        self.scale = size / max(self.w, self.h)
        self.width = self.w * self.scale
        self.height = self.h * self.scale
        self.items = []

    def _pt(self, p):
        # flip y so the figure reads with y upward
        return ((p[0] - self.x0) * self.scale,
                self.height - (p[1] - self.y0) * self.scale)

    def polygon(self, vertices, fill="none", stroke="black", width=1.0, opacity=1.0):
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(self._pt, vertices))
        self.items.append(
            f'<polygon points="{pts}" fill="{fill}" stroke="{stroke}" '
            f'stroke-width="{_fmt(width)}" fill-opacity="{_fmt(opacity)}"/>')

    def segment(self, a, b, stroke="red", width=1.5):
        (xa, ya), (xb, yb) = self._pt(a), self._pt(b)
        self.items.append(
            f'<line x1="{_fmt(xa)}" y1="{_fmt(ya)}" x2="{_fmt(xb)}" y2="{_fmt(yb)}" '
            f'stroke="{stroke}" stroke-width="{_fmt(width)}"/>')

    def text(self, p, s, size=12):
        x, y = self._pt(p)
        self.items.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}">{s}</text>')

    def to_string(self):
        body = "\n".join(self.items)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" '
                f'width="{_fmt(self.width)}" height="{_fmt(self.height)}" '
                f'viewBox="0 0 {_fmt(self.width)} {_fmt(self.height)}">\n{body}\n</svg>\n')


def field_figure(f, images=None):
    """Domain, region partition, cracks (red), optionally image geometry."""
    pts = [f.outer.vertices]
    if images is not None:
        for p in images.outer:
            pts.append(p.vertices)
    allpts = np.vstack(pts)
    canvas = SvgCanvas((allpts.min(axis=0), allpts.max(axis=0)))
    canvas.polygon(f.outer.vertices, stroke="black", width=1.5)
    for r in f.regions:
        canvas.polygon(r.polygon.vertices, fill="#88aadd", stroke="#335588",
                       width=0.5, opacity=0.25)
    for e in f.edges:
        if e.classification == "displacement_jump":
            canvas.segment(e.segment.a, e.segment.b, stroke="red", width=2.0)
        elif e.classification == "gradient_only_jump":
            canvas.segment(e.segment.a, e.segment.b, stroke="orange", width=1.5)
    if images is not None:
        for p in images.outer:
            canvas.polygon(p.vertices, fill="#ddaa88", stroke="#885533",
                           width=0.8, opacity=0.35)
        for h in images.holes:
            canvas.polygon(h.vertices, fill="white", stroke="#885533",
                           width=0.5, opacity=0.9)
    return canvas.to_string()


def mesh_figure(mesh, u_h=None, exaggerate=1.0):
    """Triangulation, optionally deformed by an exaggerated nodal field."""
    nodes = mesh.nodes.copy()
    if u_h is not None:
        nodes = nodes + exaggerate * np.asarray(u_h)
    canvas = SvgCanvas((nodes.min(axis=0), nodes.max(axis=0)))
    for t in mesh.triangles:
        canvas.polygon(nodes[t], fill="#88aadd", stroke="#333333",
                       width=0.4, opacity=0.2)
    for (i, j), _ in mesh.crack_edges:
        canvas.segment(nodes[i], nodes[j], stroke="red", width=1.5)
    for p, m, _ in mesh.crack_pairs:
        canvas.segment(nodes[m], nodes[p], stroke="#00aa00", width=0.8)
    return canvas.to_string()
