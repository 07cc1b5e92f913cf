"""Planar geometry kernel: polygons, boolean set operations, dilations,
line slicing and directional projection measures.

Coordinates are double precision with a global snapping tolerance
``EPS_GEOM``; vertices closer than that are merged.  Boolean operations are
delegated to the GEOS kernel (via shapely) behind the public contracts of
this module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
from shapely.errors import GEOSException
from shapely.geometry import MultiPolygon, Point
from shapely.geometry import Polygon as _ShPolygon
from shapely.geometry.polygon import orient as _sh_orient

from .errors import (
    DegenerateSlicingError,
    GeometryRobustnessError,
    InvalidArgumentError,
    InvalidGeometryError,
)

EPS_GEOM = 1e-9
# segments within this angle (radians) of the slicing direction are degenerate
EPS_ANGLE = 1e-8


def vec2(x, y=None):
    """Coerce to a float64 2-vector."""
    v = np.asarray(x, dtype=float) if y is None else np.array([x, y], dtype=float)
    if v.shape != (2,):
        raise InvalidArgumentError(f"expected a 2-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError("non-finite vector components", vector=v)
    return v


def mat2(m):
    """Coerce to a float64 2x2 matrix."""
    a = np.asarray(m, dtype=float)
    if a.shape != (2, 2):
        raise InvalidArgumentError(f"expected a 2x2 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("non-finite matrix entries")
    return a


def perp(v):
    """Rotate by +90 degrees: (x, y) -> (-y, x)."""
    return np.array([-v[1], v[0]])


def cross2(a, b):
    """Scalar 2D cross product, broadcasting over leading axes."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True)
class Segment:
    """Oriented straight segment with distinct endpoints."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", vec2(self.a))
        object.__setattr__(self, "b", vec2(self.b))
        if self.length <= EPS_GEOM:
            raise InvalidGeometryError("degenerate segment", a=self.a, b=self.b)

    @property
    def length(self):
        return float(np.linalg.norm(self.b - self.a))

    @property
    def direction(self):
        d = self.b - self.a
        return d / np.linalg.norm(d)

    def point(self, t):
        return self.a + t * (self.b - self.a)

    def to_json(self):
        return [self.a.tolist(), self.b.tolist()]


def _snap_ring(vertices):
    """Drop consecutive vertices closer than EPS_GEOM (cyclically)."""
    vs = np.asarray(vertices, dtype=float)
    if vs.ndim != 2 or vs.shape[1] != 2:
        raise InvalidGeometryError("polygon vertices must be an (N, 2) array")
    keep = []
    for v in vs:
        if not keep or np.linalg.norm(v - keep[-1]) > EPS_GEOM:
            keep.append(v)
    if len(keep) > 1 and np.linalg.norm(keep[0] - keep[-1]) <= EPS_GEOM:
        keep.pop()
    return np.array(keep)


def shoelace(vertices):
    """Signed area of a closed vertex loop (positive for CCW)."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class Polygon:
    """Simple polygon with counterclockwise vertices."""

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        vs = _snap_ring(vertices)
        if len(vs) < 3:
            raise InvalidGeometryError("polygon needs at least 3 distinct vertices",
                                       vertices=vs)
        if not np.all(np.isfinite(vs)):
            raise InvalidGeometryError("non-finite polygon vertex")
        area = shoelace(vs)
        if area <= 0:
            raise InvalidGeometryError("polygon is negatively oriented or degenerate",
                                       signed_area=area)
        if not _ShPolygon(vs).is_valid:
            raise InvalidGeometryError("polygon is not simple", vertices=vs)
        self.vertices = vs
        self.vertices.setflags(write=False)

    @property
    def area(self):
        return shoelace(self.vertices)

    @property
    def diameter(self):
        v = self.vertices
        lo, hi = v.min(axis=0), v.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def edges(self):
        v = self.vertices
        return [Segment(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def shapely(self):
        return _ShPolygon(self.vertices)

    def contains(self, point, tol=0.0):
        p = Point(*vec2(point))
        g = self.shapely()
        if tol > 0:
            g = g.buffer(tol)
        return bool(g.covers(p))

    def to_json(self):
        return self.vertices.tolist()

    @classmethod
    def from_json(cls, obj):
        return cls(obj)

    @classmethod
    def rectangle(cls, x0, y0, x1, y1):
        return cls([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    def __repr__(self):
        return f"Polygon({len(self.vertices)} vertices, area={self.area:.6g})"


class PolygonSet:
    """Boolean-operable region: disjoint outer polygons minus holes."""

    __slots__ = ("outer", "holes")

    def __init__(self, outer, holes=(), validate=True):
        self.outer = tuple(p if isinstance(p, Polygon) else Polygon(p) for p in outer)
        self.holes = tuple(p if isinstance(p, Polygon) else Polygon(p) for p in holes)
        if validate:
            self._validate()

    def _validate(self):
        outers = [p.shapely() for p in self.outer]
        for i in range(len(outers)):
            for j in range(i + 1, len(outers)):
                inter = outers[i].intersection(outers[j]).area
                if inter > EPS_GEOM * (outers[i].area + outers[j].area + 1.0):
                    raise InvalidGeometryError(
                        "outer polygons overlap", pair=(i, j), overlap_area=inter)
        for k, h in enumerate(self.holes):
            hs = h.shapely()
            owners = [i for i, o in enumerate(outers)
                      if o.intersection(hs).area >= hs.area * (1 - 1e-9)]
            if len(owners) != 1:
                raise InvalidGeometryError(
                    "hole not strictly inside exactly one outer", hole_index=k)
        if self.area < -EPS_GEOM:
            raise InvalidGeometryError("negative total area", area=self.area)

    @property
    def area(self):
        return sum(p.area for p in self.outer) - sum(h.area for h in self.holes)

    def shapely(self):
        outer = shapely.union_all([p.shapely() for p in self.outer])
        if self.holes:
            outer = outer.difference(shapely.union_all([h.shapely() for h in self.holes]))
        return outer

    @classmethod
    def from_polygon(cls, p):
        return cls([p], validate=False)

    @classmethod
    def from_shapely(cls, geom):
        outer, holes = [], []
        polys = []
        if geom.geom_type == "Polygon":
            polys = [geom]
        elif geom.geom_type in ("MultiPolygon", "GeometryCollection"):
            polys = [g for g in geom.geoms if g.geom_type == "Polygon"]
        for g in polys:
            if g.area <= EPS_GEOM:
                continue
            g = _sh_orient(g, sign=1.0)
            outer.append(Polygon(np.asarray(g.exterior.coords)[:-1]))
            for ring in g.interiors:
                coords = np.asarray(ring.coords)[:-1]
                if abs(shoelace(coords)) <= EPS_GEOM:
                    continue
                if shoelace(coords) < 0:
                    coords = coords[::-1]
                holes.append(Polygon(coords))
        return cls(outer, holes, validate=False)

    def to_json(self):
        return {"outer": [p.to_json() for p in self.outer],
                "holes": [h.to_json() for h in self.holes]}

    @classmethod
    def from_json(cls, obj):
        return cls([Polygon.from_json(p) for p in obj["outer"]],
                   [Polygon.from_json(h) for h in obj.get("holes", [])])

    def __repr__(self):
        return f"PolygonSet({len(self.outer)} outer, {len(self.holes)} holes, area={self.area:.6g})"


def polygon_area(p):
    """Shoelace area of a simple CCW polygon."""
    if not isinstance(p, Polygon):
        p = Polygon(p)
    return p.area


def _as_polyset(s):
    if isinstance(s, PolygonSet):
        return s
    if isinstance(s, Polygon):
        return PolygonSet.from_polygon(s)
    raise InvalidArgumentError(f"expected Polygon or PolygonSet, got {type(s).__name__}")


def boolean_op(a, b, kind):
    """Union / intersection / difference of two polygon sets."""
    ga, gb = _as_polyset(a).shapely(), _as_polyset(b).shapely()
    try:
        if kind == "union":
            res = ga.union(gb)
        elif kind == "intersection":
            res = ga.intersection(gb)
        elif kind == "difference":
            res = ga.difference(gb)
        else:
            raise InvalidArgumentError(f"unknown boolean op {kind!r}")
        return PolygonSet.from_shapely(res)
    except GEOSException as exc:
        raise GeometryRobustnessError(
            f"boolean {kind} failed: {exc}",
            a_bounds=ga.bounds, b_bounds=gb.bounds) from exc


def union_area(sets):
    """Area of the union of many polygon sets (single GEOS pass)."""
    return float(shapely.union_all([_as_polyset(s).shapely() for s in sets]).area)


def dilation_area(s, r, arc_segments=64):
    """Area of the closed r-neighborhood {x : dist(x, s) <= r}.

    Realized as the union of the set itself with edge rectangles and vertex
    discs (regular ``arc_segments``-gons) along every boundary ring.
    """
    s = _as_polyset(s)
    if r < 0:
        raise InvalidArgumentError("dilation radius must be nonnegative", r=r)
    if r == 0:
        return float(s.shapely().area)
    pieces = [s.shapely()]
    ang = np.linspace(0.0, 2 * np.pi, arc_segments, endpoint=False)
    disc = r * np.column_stack([np.cos(ang), np.sin(ang)])
    for poly in (*s.outer, *s.holes):
        vs = poly.vertices
        for i in range(len(vs)):
            a, b = vs[i], vs[(i + 1) % len(vs)]
            n = perp((b - a) / np.linalg.norm(b - a)) * r
            pieces.append(_ShPolygon([a - n, b - n, b + n, a + n]))
            pieces.append(_ShPolygon(vs[i] + disc))
    try:
        return float(shapely.union_all(pieces).area)
    except GEOSException as exc:
        raise GeometryRobustnessError(f"dilation union failed: {exc}") from exc


# ---------------------------------------------------------------------------
# line slicing


def _line_sides(points, xi, w, atol):
    """Signed side of each point w.r.t. the line {w + t xi}; |.| <= atol is on it."""
    s = cross2(np.broadcast_to(xi, points.shape), points - w)
    s = np.where(np.abs(s) <= atol, 0.0, s)
    return np.sign(s)


def slice_count(curves, xi, w, atol=EPS_GEOM):
    """Number of transversal intersections of the line {w + t xi} with segments.

    Tie-break: a crossing at a shared vertex of adjacent segments counts once,
    and only if the segments leave to opposite sides of the line; a lone
    segment endpoint on the line counts once.
    """
    xi = vec2(xi)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-9:
        raise InvalidArgumentError("slicing direction must be a unit vector", xi=xi)
    w = vec2(w)
    if abs(float(np.dot(w, xi))) > 1e-12 * (1 + np.linalg.norm(w)):
        raise InvalidArgumentError("offset w must lie on the hyperplane of xi",
                                   w=w, dot=float(np.dot(w, xi)))
    count = 0
    on_line_events = []  # (vertex, side of the far endpoint or 0 for collinear)
    for seg in curves:
        sa, sb = _line_sides(np.array([seg.a, seg.b]), xi, w, atol)
        if sa * sb < 0:
            count += 1
        elif sa == 0 and sb == 0:
            on_line_events.append((seg.a, 0.0))
            on_line_events.append((seg.b, 0.0))
        elif sa == 0:
            on_line_events.append((seg.a, sb))
        elif sb == 0:
            on_line_events.append((seg.b, sa))
    count += _vertex_crossings(on_line_events, atol)
    return count


def _vertex_crossings(events, atol):
    """Resolve on-line vertex events; collinear runs act as pass-throughs."""
    if not events:
        return 0
    pts = np.array([p for p, _ in events])
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tol = max(atol, EPS_GEOM)
    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(pts[i] - pts[j]) <= tol:
                parent[find(i)] = find(j)
    # a collinear segment was recorded as two consecutive zero-side events;
    # union its endpoints so the run is transparent to side changes
    zero_idx = [i for i, (_, s) in enumerate(events) if s == 0]
    for k in range(0, len(zero_idx) - 1, 2):
        parent[find(zero_idx[k])] = find(zero_idx[k + 1])
    comps = {}
    for i, (_, s) in enumerate(events):
        comps.setdefault(find(i), []).append(s)
    crossings = 0
    for comp in comps.values():
        plus = sum(1 for s in comp if s > 0)
        minus = sum(1 for s in comp if s < 0)
        if plus and minus:
            crossings += min(plus, minus)
        elif plus + minus == 1:
            crossings += 1
    return crossings


def projection_measure_V(gamma, lam, mu, atol=EPS_GEOM):
    """1D measure of offsets on the hyperplane of mu whose mu-line crosses
    gamma exactly once and lam exactly once.

    Endpoints of all segments are projected onto the hyperplane; crossing
    counts are constant on each elementary interval of the arrangement and
    are evaluated at interval midpoints.
    """
    mu = vec2(mu)
    if abs(np.linalg.norm(mu) - 1.0) > 1e-9:
        raise InvalidArgumentError("mu must be a unit vector", mu=mu)
    segs = list(gamma) + list(lam)
    for seg in segs:
        if abs(float(cross2(seg.direction, mu))) < EPS_ANGLE and seg.length > EPS_GEOM:
            raise DegenerateSlicingError(
                "segment parallel to the slicing direction",
                segment=seg.to_json(), mu=mu)
    nu = perp(mu)
    offs = np.concatenate([[float(np.dot(s.a, nu)), float(np.dot(s.b, nu))] for s in segs])
    offs = np.sort(offs)
    keep = [offs[0]]
    for o in offs[1:]:
        if o - keep[-1] > atol:
            keep.append(o)
    total = 0.0
    for lo, hi in zip(keep[:-1], keep[1:]):
        mid = 0.5 * (lo + hi)
        w = mid * nu
        cg = slice_count(gamma, mu, w, atol=atol)
        cl = slice_count(lam, mu, w, atol=atol)
        if cg == 1 and cl == 1:
            total += hi - lo
    return total


# ---------------------------------------------------------------------------
# collinear segment bookkeeping (shared with the field and report modules)


def canonical_line(a, b):
    """Canonical (direction, normal, offset) of the line through a, b.

    The direction sign is fixed so collinear segments of either orientation
    map to the same key; the normal is direction rotated by +90 degrees.
    """
    d = np.asarray(b, float) - np.asarray(a, float)
    d = d / np.linalg.norm(d)
    if d[0] < -1e-12 or (abs(d[0]) <= 1e-12 and d[1] < 0):
        d = -d
    n = perp(d)
    return d, n, float(np.dot(a, n))


def group_collinear(segments, offset_tol=EPS_GEOM):
    """Group segment indices by supporting line. Returns list of index lists.

    Lines are bucketed on (direction, offset) rounded to the tolerance;
    neighboring buckets are merged so values straddling a bucket edge still
    group together.
    """
    if not segments:
        return []
    keys = np.empty((len(segments), 3))
    for i, s in enumerate(segments):
        d, _, c = canonical_line(s.a, s.b)
        keys[i] = (d[0], d[1], c)
    q = np.round(keys / offset_tol).astype(np.int64)
    buckets = {}
    for i, k in enumerate(map(tuple, q)):
        buckets.setdefault(k, []).append(i)
    parent = {k: k for k in buckets}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    offsets = [(di, dj, dc) for di in (-1, 0, 1) for dj in (-1, 0, 1)
               for dc in (-1, 0, 1) if (di, dj, dc) != (0, 0, 0)]
    for k in buckets:
        for off in offsets:
            nb = (k[0] + off[0], k[1] + off[1], k[2] + off[2])
            if nb in parent:
                parent[find(k)] = find(nb)
    groups = {}
    for k, idxs in buckets.items():
        groups.setdefault(find(k), []).extend(idxs)
    return [sorted(g) for g in groups.values()]


def merge_intervals(intervals, tol=EPS_GEOM):
    """Union of 1D closed intervals as a sorted disjoint list."""
    ivs = sorted((lo, hi) for lo, hi in intervals if hi - lo > tol)
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1] + tol:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def intersect_interval_lists(a, b, tol=EPS_GEOM):
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if hi - lo > tol:
                out.append((lo, hi))
    return merge_intervals(out, tol)


def subtract_interval_lists(a, b, tol=EPS_GEOM):
    """Set difference (union of a) minus (union of b)."""
    result = []
    for lo, hi in merge_intervals(a, tol):
        pieces = [(lo, hi)]
        for blo, bhi in merge_intervals(b, tol):
            nxt = []
            for plo, phi in pieces:
                if bhi <= plo + tol or blo >= phi - tol:
                    nxt.append((plo, phi))
                    continue
                if blo > plo + tol:
                    nxt.append((plo, min(blo, phi)))
                if bhi < phi - tol:
                    nxt.append((max(bhi, plo), phi))
            pieces = nxt
        result.extend(pieces)
    return merge_intervals(result, tol)


def collinear_overlap_length(segs_a, segs_b, tol=EPS_GEOM):
    """Total length of the 1D overlap between two segment families."""
    segs = list(segs_a) + list(segs_b)
    na = len(list(segs_a))
    total = 0.0
    for group in group_collinear(segs, offset_tol=tol):
        d, _, _ = canonical_line(segs[group[0]].a, segs[group[0]].b)
        iv_a, iv_b = [], []
        for i in group:
            t0, t1 = float(np.dot(segs[i].a, d)), float(np.dot(segs[i].b, d))
            iv = (min(t0, t1), max(t0, t1))
            (iv_a if i < na else iv_b).append(iv)
        for lo, hi in intersect_interval_lists(merge_intervals(iv_a), merge_intervals(iv_b)):
            total += hi - lo
    return total
