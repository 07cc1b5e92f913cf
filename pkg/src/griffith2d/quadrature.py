"""Triangle quadrature and polygon triangulation.

Rules are collapsed (Duffy) tensor Gauss-Legendre rules on the reference
triangle (0,0)-(1,0)-(0,1); a rule of given order uses (order+1)^2 points
and integrates polynomials of total degree <= 2*order exactly.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import InvalidGeometryError
from .geom2d import cross2, EPS_GEOM, shoelace


@lru_cache(maxsize=None)
def triangle_rule(order):
    """Reference-triangle quadrature points (q, 2) and weights (q,)."""
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    n = order + 1
    x1, w1 = leggauss(n)
    u = 0.5 * (x1 + 1.0)
    wu = 0.5 * w1
    uu, vv = np.meshgrid(u, u, indexing="ij")
    ww = np.outer(wu, wu) * (1.0 - uu)
    pts = np.column_stack([uu.ravel(), (vv * (1.0 - uu)).ravel()])
    wts = ww.ravel()
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def ear_clip(vertices):
    """Triangulate a simple CCW polygon into (m, 3, 2) triangles."""
    vs = [np.asarray(v, float) for v in vertices]
    if len(vs) < 3:
        raise InvalidGeometryError("cannot triangulate fewer than 3 vertices")
    scale = max(np.ptp([v[0] for v in vs]), np.ptp([v[1] for v in vs]), 1e-30)
    area_tol = (EPS_GEOM * scale) ** 2
    tris = []
    idx = list(range(len(vs)))
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 4 * len(vs) ** 2:
            raise InvalidGeometryError("ear clipping failed to converge",
                                       remaining=len(idx))
        clipped = False
        for k in range(len(idx)):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = vs[i0], vs[i1], vs[i2]
            cross = float(cross2(b - a, c - b))
            if cross < -area_tol:
                continue  # reflex vertex
            if cross <= area_tol:
                # collinear spike or straight run: drop the middle vertex
                idx.pop(k)
                clipped = True
                break
            if any(_in_triangle(vs[j], a, b, c, area_tol)
                   for j in idx if j not in (i0, i1, i2)):
                continue
            tris.append((a, b, c))
            idx.pop(k)
            clipped = True
            break
        if not clipped:
            raise InvalidGeometryError("no ear found; polygon may be non-simple")
    a, b, c = (vs[i] for i in idx)
    if abs(float(cross2(b - a, c - b))) > area_tol:
        tris.append((a, b, c))
    return np.array(tris) if tris else np.zeros((0, 3, 2))


def _in_triangle(p, a, b, c, tol):
    d1 = float(cross2(b - a, p - a))
    d2 = float(cross2(c - b, p - b))
    d3 = float(cross2(a - c, p - c))
    return d1 > tol and d2 > tol and d3 > tol


def tri_diameters(tris):
    e0 = np.linalg.norm(tris[:, 1] - tris[:, 0], axis=1)
    e1 = np.linalg.norm(tris[:, 2] - tris[:, 1], axis=1)
    e2 = np.linalg.norm(tris[:, 0] - tris[:, 2], axis=1)
    return np.max(np.stack([e0, e1, e2]), axis=0)


def refine_triangles(tris, max_diam):
    """Midpoint 4-split until every triangle diameter is <= max_diam."""
    tris = np.asarray(tris, float)
    while len(tris):
        diam = tri_diameters(tris)
        big = diam > max_diam
        if not big.any():
            break
        keep = tris[~big]
        split = tris[big]
        a, b, c = split[:, 0], split[:, 1], split[:, 2]
        ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
        tris = np.concatenate([
            keep,
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ])
    return tris


def quad_points(tris, order):
    """Physical quadrature points (m, q, 2) and weights (m, q) on triangles."""
    ref, w = triangle_rule(order)
    tris = np.asarray(tris, float)
    a = tris[:, 0][:, None, :]
    e1 = (tris[:, 1] - tris[:, 0])[:, None, :]
    e2 = (tris[:, 2] - tris[:, 0])[:, None, :]
    pts = a + ref[None, :, 0, None] * e1 + ref[None, :, 1, None] * e2
    jac = cross2(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])  # 2*area
    return pts, w[None, :] * jac[:, None]


def integrate(tris, func, order, signs=None):
    """Integrate a scalar field over triangles; func maps (..., 2) -> (...)."""
    if len(tris) == 0:
        return 0.0
    pts, wts = quad_points(tris, order)
    vals = np.asarray(func(pts))
    if signs is not None:
        wts = wts * np.asarray(signs, float)[:, None]
    return float(np.sum(vals * wts))


def triangle_area_total(tris, signs=None):
    if len(tris) == 0:
        return 0.0
    areas = 0.5 * cross2(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    if signs is not None:
        areas = areas * np.asarray(signs, float)
    return float(areas.sum())


def triangulate_polygon(polygon):
    """Triangles of a geom2d.Polygon (simple, CCW)."""
    return ear_clip(polygon.vertices)


def triangulate_polyset(ps):
    """Signed triangles (tris, signs) covering a PolygonSet: holes count -1."""
    parts, signs = [], []
    for p in ps.outer:
        t = ear_clip(p.vertices)
        parts.append(t)
        signs.append(np.ones(len(t)))
    for h in ps.holes:
        t = ear_clip(h.vertices)
        parts.append(t)
        signs.append(-np.ones(len(t)))
    if not parts:
        return np.zeros((0, 3, 2)), np.zeros(0)
    return np.concatenate(parts), np.concatenate(signs)


def triangulate_shapely(geom, floor=1e-18):
    """Signed triangles for a shapely Polygon/MultiPolygon result.

    Works on the raw rings (no snapping) so that slivers far below the
    geometry tolerance still integrate; pieces of area <= floor are dropped.
    """
    polys = []
    if geom.geom_type == "Polygon":
        polys = [geom]
    elif geom.geom_type in ("MultiPolygon", "GeometryCollection"):
        polys = [g for g in geom.geoms if g.geom_type == "Polygon"]
    parts, signs = [], []
    for g in polys:
        if g.area <= floor:
            continue
        ext = np.asarray(g.exterior.coords)[:-1]
        if shoelace(ext) < 0:
            ext = ext[::-1]
        t = ear_clip(ext)
        parts.append(t)
        signs.append(np.ones(len(t)))
        for ring in g.interiors:
            coords = np.asarray(ring.coords)[:-1]
            if abs(shoelace(coords)) <= floor:
                continue
            if shoelace(coords) < 0:
                coords = coords[::-1]
            t = ear_clip(coords)
            parts.append(t)
            signs.append(-np.ones(len(t)))
    if not parts:
        return np.zeros((0, 3, 2)), np.zeros(0)
    return np.concatenate(parts), np.concatenate(signs)


def polygon_sanity_area(vertices):
    return shoelace(vertices)
