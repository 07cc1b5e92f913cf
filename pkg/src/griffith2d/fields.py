"""Regionwise-smooth planar fields with an explicit polygonal jump set.

A field is a partition of the outer domain into polygonal regions, each
carrying a smooth map (affine, bivariate polynomial, or affine plus radial
plateau bumps).  Shared region boundaries are extracted into oriented crack
edges and classified by trace comparison.

Conventions: the crack normal nu is the edge direction rotated by +90
degrees; the plus side is the region nu points into (the left region), and
the jump is plus trace minus minus trace, so [u] . nu is invariant under
swapping sides together with flipping nu.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as npoly
from shapely import STRtree
from shapely.geometry import Point

from .errors import (
    AmbiguousPointError,
    CoverageError,
    DatumError,
    InvalidArgumentError,
    PartitionError,
)
from .geom2d import (
    cross2,
    EPS_GEOM,
    Polygon,
    Segment,
    canonical_line,
    group_collinear,
    mat2,
    perp,
    vec2,
)

JUMP_TOL_FACTOR = 1e-9
BOUNDARY_ID = -1
_GAUSS5 = np.polynomial.legendre.leggauss(5)


# ---------------------------------------------------------------------------
# bump profile: radial, flat plateau, quintic C^2 decay to zero


def bump_profile(r, theta):
    """phi(r): 1 for r <= 1-theta, quintic smoothstep down to 0 at r = 1."""
    r = np.asarray(r, float)
    s = np.clip((r - (1.0 - theta)) / theta, 0.0, 1.0)
    return 1.0 - (6 * s**5 - 15 * s**4 + 10 * s**3)


def bump_profile_d1(r, theta):
    r = np.asarray(r, float)
    s = (r - (1.0 - theta)) / theta
    inside = (s > 0) & (s < 1)
    s = np.clip(s, 0.0, 1.0)
    return np.where(inside, -(30 * s**4 - 60 * s**3 + 30 * s**2) / theta, 0.0)


def bump_profile_d2(r, theta):
    r = np.asarray(r, float)
    s = (r - (1.0 - theta)) / theta
    inside = (s > 0) & (s < 1)
    s = np.clip(s, 0.0, 1.0)
    return np.where(inside, -(120 * s**3 - 180 * s**2 + 60 * s) / theta**2, 0.0)


def bump_max_slope(theta):
    """Maximal |phi'| of the quintic plateau profile: 15 / (8 theta)."""
    return 15.0 / (8.0 * theta)


@dataclass(frozen=True)
class Bump:
    """Radial translation bump: adds radius * phi(|x-center|/radius) * vector."""

    center: np.ndarray
    radius: float
    theta: float
    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", vec2(self.center))
        object.__setattr__(self, "vector", vec2(self.vector))
        if not self.radius > 0:
            raise InvalidArgumentError("bump radius must be positive", radius=self.radius)
        if not 0 < self.theta < 1:
            raise InvalidArgumentError("bump plateau parameter must be in (0,1)",
                                       theta=self.theta)

    def to_json(self):
        return {"center": self.center.tolist(), "radius": self.radius,
                "theta": self.theta, "vector": self.vector.tolist()}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["center"], float(obj["radius"]), float(obj["theta"]),
                   obj["vector"])


class RegionMap:
    """Map of one region: affine, polynomial, or affine plus bumps.

    Polynomial coefficients are stored as c[component, i, j] multiplying
    x^i y^j.  Evaluation, gradient and Hessian are analytic and vectorized
    over trailing point batches.
    """

    __slots__ = ("kind", "A", "b", "coeffs", "degree", "bumps", "_bump_arrays")

    def __init__(self, kind, A=None, b=None, coeffs=None, bumps=()):
        self.kind = kind
        self.bumps = tuple(bumps)
        self._bump_arrays = None
        if kind in ("affine", "affine_plus_bumps"):
            self.A = mat2(A if A is not None else np.zeros((2, 2)))
            self.b = vec2(b if b is not None else np.zeros(2))
            self.coeffs = None
            self.degree = 1
            if kind == "affine" and self.bumps:
                raise InvalidArgumentError("affine map cannot carry bumps")
        elif kind == "polynomial":
            c = np.asarray(coeffs, float)
            if c.ndim != 3 or c.shape[0] != 2:
                raise InvalidArgumentError("polynomial coeffs must have shape (2, m, n)")
            self.coeffs = c
            self.A = None
            self.b = None
            self.degree = max(c.shape[1], c.shape[2]) - 1
            if self.bumps:
                raise InvalidArgumentError("polynomial map cannot carry bumps")
        else:
            raise InvalidArgumentError(f"unknown map kind {kind!r}")

    # -- constructors ------------------------------------------------------
    @classmethod
    def affine(cls, A, b):
        return cls("affine", A=A, b=b)

    @classmethod
    def constant(cls, v):
        return cls("affine", A=np.zeros((2, 2)), b=v)

    @classmethod
    def identity(cls):
        return cls("affine", A=np.eye(2), b=np.zeros(2))

    @classmethod
    def polynomial(cls, coeffs):
        return cls("polynomial", coeffs=coeffs)

    @classmethod
    def affine_plus_bumps(cls, A, b, bumps):
        return cls("affine_plus_bumps", A=A, b=b, bumps=bumps)

    @property
    def is_affine(self):
        return self.kind == "affine"

    def try_affine(self):
        """(A, b) when the map is exactly affine (also degree-1 coeff tables)."""
        if self.kind == "affine":
            return self.A, self.b
        if self.coeffs is None:
            return None
        c = self.coeffs
        mask = np.ones(c.shape, dtype=bool)
        mask[:, 0, 0] = False
        if c.shape[1] > 1:
            mask[:, 1, 0] = False
        if c.shape[2] > 1:
            mask[:, 0, 1] = False
        if np.abs(c[mask]).max(initial=0.0) != 0.0:
            return None
        A = np.zeros((2, 2))
        if c.shape[1] > 1:
            A[:, 0] = c[:, 1, 0]
        if c.shape[2] > 1:
            A[:, 1] = c[:, 0, 1]
        return A, c[:, 0, 0].copy()

    # -- evaluation --------------------------------------------------------
    def _bumps_stacked(self):
        if self._bump_arrays is None:
            self._bump_arrays = (
                np.array([bp.center for bp in self.bumps]),
                np.array([bp.radius for bp in self.bumps]),
                np.array([bp.theta for bp in self.bumps]),
                np.array([bp.vector for bp in self.bumps]),
            )
        return self._bump_arrays

    def _bump_terms(self, x, term):
        """Sum of bump contributions, chunked over flattened points."""
        centers, radii, thetas, vectors = self._bumps_stacked()
        flat = x.reshape(-1, 2)
        chunk = max(1, int(2e7) // max(len(self.bumps), 1))
        outs = []
        for start in range(0, len(flat), chunk):
            pts = flat[start:start + chunk]
            d = pts[:, None, :] - centers          # (m, n, 2)
            r = np.linalg.norm(d, axis=-1)         # (m, n)
            rhat = r / radii
            if term == "value":
                phi = bump_profile(rhat, thetas)
                outs.append((radii * phi) @ vectors)
            elif term == "grad":
                dphi = bump_profile_d1(rhat, thetas)
                safe = np.where(r > 0, r, 1.0)
                er = d / safe[..., None]
                w = dphi[..., None] * er           # (m, n, 2)
                outs.append(np.einsum("mnj,nk->mkj", w, vectors))
            else:
                dphi = bump_profile_d1(rhat, thetas)
                ddphi = bump_profile_d2(rhat, thetas)
                safe = np.where(r > 0, r, 1.0)
                er = d / safe[..., None]
                ee = np.einsum("mni,mnj->mnij", er, er)
                eye = np.eye(2)
                hs = (ddphi / radii)[..., None, None] * ee \
                    + (dphi / safe)[..., None, None] * (eye - ee)
                hs = np.where((r > 0)[..., None, None], hs, 0.0)
                outs.append(np.einsum("nk,mnij->mkij", vectors, hs))
        out = np.concatenate(outs) if len(outs) > 1 else outs[0]
        if term == "value":
            return out.reshape(x.shape)
        if term == "grad":
            return out.reshape(x.shape[:-1] + (2, 2))
        return out.reshape(x.shape[:-1] + (2, 2, 2))

    def __call__(self, x):
        x = np.asarray(x, float)
        if self.coeffs is not None:
            xs, ys = x[..., 0], x[..., 1]
            return np.stack([npoly.polyval2d(xs, ys, self.coeffs[k]) for k in (0, 1)],
                            axis=-1)
        out = x @ self.A.T + self.b
        if self.bumps:
            out = out + self._bump_terms(x, "value")
        return out

    def grad(self, x):
        x = np.asarray(x, float)
        if self.coeffs is not None:
            xs, ys = x[..., 0], x[..., 1]
            g = np.empty(x.shape[:-1] + (2, 2))
            for k in (0, 1):
                cx = npoly.polyder(self.coeffs[k], axis=0)
                cy = npoly.polyder(self.coeffs[k], axis=1)
                g[..., k, 0] = npoly.polyval2d(xs, ys, cx)
                g[..., k, 1] = npoly.polyval2d(xs, ys, cy)
            return g
        g = np.broadcast_to(self.A, x.shape[:-1] + (2, 2)).copy()
        if self.bumps:
            g = g + self._bump_terms(x, "grad")
        return g

    def hess(self, x):
        """Third-order array H[..., k, i, j] = d^2 (map_k) / dx_i dx_j."""
        x = np.asarray(x, float)
        if self.coeffs is not None:
            xs, ys = x[..., 0], x[..., 1]
            h = np.empty(x.shape[:-1] + (2, 2, 2))
            for k in (0, 1):
                cxx = npoly.polyder(npoly.polyder(self.coeffs[k], axis=0), axis=0)
                cxy = npoly.polyder(npoly.polyder(self.coeffs[k], axis=0), axis=1)
                cyy = npoly.polyder(npoly.polyder(self.coeffs[k], axis=1), axis=1)
                h[..., k, 0, 0] = npoly.polyval2d(xs, ys, cxx)
                h[..., k, 0, 1] = h[..., k, 1, 0] = npoly.polyval2d(xs, ys, cxy)
                h[..., k, 1, 1] = npoly.polyval2d(xs, ys, cyy)
            return h
        if not self.bumps:
            return np.zeros(x.shape[:-1] + (2, 2, 2))
        return self._bump_terms(x, "hess")

    # -- serialization -----------------------------------------------------
    def to_json(self):
        if self.kind == "affine":
            return {"kind": "affine", "A": self.A.tolist(), "b": self.b.tolist()}
        if self.kind == "polynomial":
            coeffs = {}
            for k in (0, 1):
                comp = {}
                c = self.coeffs[k]
                for i in range(c.shape[0]):
                    for j in range(c.shape[1]):
                        if c[i, j] != 0.0:
                            comp[f"{i},{j}"] = c[i, j]
                coeffs[str(k)] = comp
            return {"kind": "polynomial", "degree": self.degree, "coeffs": coeffs}
        return {"kind": "affine_plus_bumps",
                "affine": {"A": self.A.tolist(), "b": self.b.tolist()},
                "bumps": [bp.to_json() for bp in self.bumps]}

    @classmethod
    def from_json(cls, obj):
        kind = obj["kind"]
        if kind == "affine":
            return cls.affine(obj["A"], obj["b"])
        if kind == "polynomial":
            d = int(obj["degree"])
            c = np.zeros((2, d + 1, d + 1))
            for comp, table in obj["coeffs"].items():
                k = int(comp)
                for key, val in table.items():
                    i, j = (int(t) for t in key.split(","))
                    c[k, i, j] = float(val)
            return cls.polynomial(c)
        if kind == "affine_plus_bumps":
            aff = obj["affine"]
            return cls.affine_plus_bumps(
                aff["A"], aff["b"], [Bump.from_json(b) for b in obj["bumps"]])
        raise InvalidArgumentError(f"unknown map kind {kind!r}")

    def as_poly_coeffs(self):
        """Coefficient table (2, m, n) when the map is bump-free."""
        if self.coeffs is not None:
            return self.coeffs
        if self.bumps:
            return None
        c = np.zeros((2, 2, 2))
        c[:, 0, 0] = self.b
        c[0, 1, 0] = self.A[0, 0]
        c[0, 0, 1] = self.A[0, 1]
        c[1, 1, 0] = self.A[1, 0]
        c[1, 0, 1] = self.A[1, 1]
        return c


def compose_with_identity(map_u, epsilon):
    """Deformation map id + epsilon * u from a displacement map u."""
    if map_u.kind == "polynomial":
        c = epsilon * map_u.coeffs.copy()
        if c.shape[1] < 2 or c.shape[2] < 2:
            pad = np.zeros((2, max(2, c.shape[1]), max(2, c.shape[2])))
            pad[:, :c.shape[1], :c.shape[2]] = c
            c = pad
        c[0, 1, 0] += 1.0
        c[1, 0, 1] += 1.0
        return RegionMap.polynomial(c)
    A = np.eye(2) + epsilon * map_u.A
    b = epsilon * map_u.b
    if map_u.bumps:
        bumps = [replace(bp, vector=epsilon * bp.vector) for bp in map_u.bumps]
        return RegionMap.affine_plus_bumps(A, b, bumps)
    return RegionMap.affine(A, b)


def strip_identity(map_y, epsilon):
    """Displacement map (y - id) / epsilon from a deformation map y."""
    if map_y.kind == "polynomial":
        c = map_y.coeffs.copy()
        c[0, 1, 0] -= 1.0
        c[1, 0, 1] -= 1.0
        return RegionMap.polynomial(c / epsilon)
    A = (map_y.A - np.eye(2)) / epsilon
    b = map_y.b / epsilon
    if map_y.bumps:
        bumps = [replace(bp, vector=bp.vector / epsilon) for bp in map_y.bumps]
        return RegionMap.affine_plus_bumps(A, b, bumps)
    return RegionMap.affine(A, b)


# ---------------------------------------------------------------------------
# regions, crack edges, fields


@dataclass(frozen=True)
class Region:
    id: int
    polygon: Polygon
    map: RegionMap


@dataclass(frozen=True)
class CrackEdge:
    """Oriented interface between two regions (or a free face).

    ``normal`` is the segment direction rotated by +90 degrees and points
    into the plus-side region ``left_region``.
    """

    segment: Segment
    left_region: int
    right_region: int | None
    normal: np.ndarray
    classification: str

    @property
    def length(self):
        return self.segment.length


DISPLACEMENT_JUMP = "displacement_jump"
GRADIENT_ONLY_JUMP = "gradient_only_jump"
NO_JUMP = "no_jump"


@dataclass(frozen=True)
class RegionField:
    kind: str
    outer: Polygon
    inner: Polygon
    regions: tuple
    epsilon: float | None
    h: RegionMap | None
    jump_tol: float
    edges: tuple = field(default=())

    @property
    def region_by_id(self):
        return {r.id: r for r in self.regions}

    @property
    def diameter(self):
        return self.outer.diameter

    def region_at(self, x, tol=EPS_GEOM):
        """Region owning an interior point; boundary points are ambiguous."""
        x = vec2(x)
        pt = Point(*x)
        hits = [r for r in self.regions if r.polygon.shapely().covers(pt)]
        if not hits:
            raise InvalidArgumentError("point lies in no region", point=x)
        exterior_dist = min(h.polygon.shapely().exterior.distance(pt) for h in hits)
        if len(hits) > 1 or exterior_dist <= tol:
            raise AmbiguousPointError("point lies on a region boundary",
                                      point=x, distance=exterior_dist)
        return hits[0]

    def map_at(self, x):
        return self.region_at(x).map


def default_jump_tol(outer):
    return JUMP_TOL_FACTOR * outer.diameter


def build_field(kind, outer, regions, inner=None, epsilon=None, h=None,
                jump_tol=None, validate=True):
    """Assemble and validate a RegionField; extracts and classifies edges.

    regions: iterable of (id, Polygon, RegionMap) or Region.
    """
    if kind not in ("deformation", "displacement"):
        raise InvalidArgumentError(f"field kind must be deformation or displacement, got {kind!r}")
    outer = outer if isinstance(outer, Polygon) else Polygon(outer)
    inner = outer if inner is None else (inner if isinstance(inner, Polygon) else Polygon(inner))
    regs = []
    for r in regions:
        if isinstance(r, Region):
            regs.append(r)
        else:
            rid, poly, rmap = r
            regs.append(Region(int(rid), poly if isinstance(poly, Polygon) else Polygon(poly),
                               rmap))
    if not regs:
        raise InvalidArgumentError("field needs at least one region")
    ids = [r.id for r in regs]
    if len(set(ids)) != len(ids):
        raise InvalidArgumentError("duplicate region ids", ids=ids)
    if epsilon is not None and not epsilon > 0:
        raise InvalidArgumentError("epsilon must be positive", epsilon=epsilon)
    tol = default_jump_tol(outer) if jump_tol is None else float(jump_tol)
    if validate:
        _validate_partition(outer, inner, regs)
    f = RegionField(kind, outer, inner, tuple(regs), epsilon, h, tol)
    edges = _extract_edges(f)
    f = replace(f, edges=tuple(edges))
    if validate and h is not None:
        _validate_datum(f)
    return f


def _validate_partition(outer, inner, regs):
    outer_sh = outer.shapely()
    area_outer = outer_sh.area
    tol_overlap = EPS_GEOM * max(area_outer, 1.0)
    shapes = [r.polygon.shapely() for r in regs]
    tree = STRtree(shapes)
    for i, s in enumerate(shapes):
        for j in tree.query(s):
            j = int(j)
            if j <= i:
                continue
            inter = s.intersection(shapes[j]).area
            if inter > tol_overlap:
                raise PartitionError(
                    "regions overlap beyond tolerance",
                    regions=(regs[i].id, regs[j].id), overlap_area=inter)
        outside = s.area - s.intersection(outer_sh).area
        if outside > tol_overlap:
            raise PartitionError("region extends outside the outer domain",
                                 region=regs[i].id, outside_area=outside)
    total = sum(s.area for s in shapes)
    gap = area_outer - total
    if abs(gap) > 1e-6 * area_outer:
        raise CoverageError("regions do not cover the outer domain",
                            gap_area=gap, outer_area=area_outer)
    if inner is not outer:
        inner_sh = inner.shapely()
        if inner_sh.area - inner_sh.intersection(outer_sh).area > tol_overlap:
            raise InvalidArgumentError("inner domain not contained in outer domain")


def _validate_datum(f):
    """Regions meeting the datum zone must carry h there (sampled check)."""
    from .quadrature import quad_points, triangulate_shapely

    zone = f.outer.shapely().difference(f.inner.shapely())
    if zone.area <= EPS_GEOM:
        return
    for r in f.regions:
        piece = r.polygon.shapely().intersection(zone)
        if piece.area <= EPS_GEOM * max(zone.area, 1.0):
            continue
        tris, signs = triangulate_shapely(piece)
        tris = tris[signs > 0]
        pts, _ = quad_points(tris, 2)
        pts = pts.reshape(-1, 2)
        got = r.map(pts)
        want = f.h(pts)
        if f.kind == "deformation" and f.epsilon is not None:
            want = pts + f.epsilon * want
        err = float(np.max(np.linalg.norm(got - want, axis=-1)))
        if err > max(f.jump_tol, 1e-9):
            raise DatumError("region does not match the boundary datum on the datum zone",
                             region=r.id, max_error=err)


# -- edge extraction ---------------------------------------------------------


def _extract_edges(f):
    segs, payloads = [], []
    for r in f.regions:
        vs = r.polygon.vertices
        for i in range(len(vs)):
            segs.append(Segment(vs[i], vs[(i + 1) % len(vs)]))
            payloads.append(r.id)
    vs = f.outer.vertices
    for i in range(len(vs)):
        segs.append(Segment(vs[i], vs[(i + 1) % len(vs)]))
        payloads.append(BOUNDARY_ID)

    edges = []
    for group in group_collinear(segs):
        d, n, c = canonical_line(segs[group[0]].a, segs[group[0]].b)
        entries = []  # (t0, t1, region, side)
        for i in group:
            s = segs[i]
            t0, t1 = float(np.dot(s.a, d)), float(np.dot(s.b, d))
            aligned = t1 > t0
            entries.append((min(t0, t1), max(t0, t1), payloads[i],
                            1 if aligned else -1))
        cuts = np.array(sorted({t for e in entries for t in (e[0], e[1])}))
        keep = [cuts[0]]
        for t in cuts[1:]:
            if t - keep[-1] > EPS_GEOM:
                keep.append(t)
        for lo, hi in zip(keep[:-1], keep[1:]):
            mid = 0.5 * (lo + hi)
            cover = [(rid, side) for t0, t1, rid, side in entries
                     if t0 - EPS_GEOM <= mid <= t1 + EPS_GEOM]
            regionals = [(rid, side) for rid, side in cover if rid != BOUNDARY_ID]
            if not regionals:
                continue
            if any(rid == BOUNDARY_ID for rid, _ in cover):
                continue  # lies on the outer boundary: not a crack
            a_pt = lo * d + c * n
            b_pt = hi * d + c * n
            if len(regionals) == 1:
                # free crack face: material on one side only
                rid, side = regionals[0]
                normal = n if side == 1 else -n
                edges.append(CrackEdge(Segment(a_pt, b_pt), rid, None,
                                       normal, DISPLACEMENT_JUMP))
                continue
            if len(regionals) > 2 or regionals[0][1] == regionals[1][1]:
                raise PartitionError(
                    "inconsistent interface cover (overlapping regions)",
                    segment=[a_pt.tolist(), b_pt.tolist()],
                    cover=regionals)
            (r1, s1), (r2, s2) = regionals
            left, right = (r1, r2) if s1 == 1 else (r2, r1)
            seg = Segment(a_pt, b_pt)
            cls = _classify_edge(f, seg, left, right)
            edges.append(CrackEdge(seg, left, right, n, cls))
    edges.sort(key=lambda e: (e.segment.a[0], e.segment.a[1],
                              e.segment.b[0], e.segment.b[1]))
    return edges


def _edge_samples():
    t = 0.5 * (_GAUSS5[0] + 1.0)
    return np.concatenate([[0.0], t, [1.0]])


def _classify_edge(f, seg, left, right, jump_tol=None):
    tol = f.jump_tol if jump_tol is None else jump_tol
    ts = _edge_samples()
    pts = seg.a + ts[:, None] * (seg.b - seg.a)
    by_id = f.region_by_id
    ml, mr = by_id[left].map, by_id[right].map
    gap = np.linalg.norm(ml(pts) - mr(pts), axis=-1)
    if gap.max() > tol:
        return DISPLACEMENT_JUMP
    ggap = np.linalg.norm((ml.grad(pts) - mr.grad(pts)).reshape(len(ts), 4), axis=-1)
    if ggap.max() > tol:
        return GRADIENT_ONLY_JUMP
    return NO_JUMP


def crack_edges(f, jump_tol=None):
    """Edges of a field, reclassified at the given jump tolerance."""
    if jump_tol is None or jump_tol == f.jump_tol:
        return list(f.edges)
    out = []
    for e in f.edges:
        if e.right_region is None:
            out.append(e)
        else:
            cls = _classify_edge(f, e.segment, e.left_region, e.right_region, jump_tol)
            out.append(replace(e, classification=cls))
    return out


def trace_jump(f, e, t):
    """(jump, normal) at parameter t in [0,1] of a displacement_jump edge."""
    if not 0.0 <= t <= 1.0:
        raise InvalidArgumentError("edge parameter outside [0, 1]", t=t)
    if e.classification != DISPLACEMENT_JUMP:
        raise InvalidArgumentError(
            "trace_jump requires a displacement_jump edge",
            classification=e.classification)
    if e.right_region is None:
        raise InvalidArgumentError("free crack face has a single trace")
    x = e.segment.point(t)
    by_id = f.region_by_id
    jump = by_id[e.left_region].map(x) - by_id[e.right_region].map(x)
    return jump, e.normal.copy()


def gradient(f, x):
    return f.region_at(x).map.grad(vec2(x))


def hessian(f, x):
    return f.region_at(x).map.hess(vec2(x))


def jump_length(f):
    """Total length of displacement_jump edges."""
    return sum(e.length for e in f.edges if e.classification == DISPLACEMENT_JUMP)


def induced_displacement(f):
    """Displacement u = (y - id)/epsilon of a deformation field."""
    if f.kind != "deformation" or f.epsilon is None:
        raise InvalidArgumentError("induced displacement needs a deformation field with epsilon")
    regs = [Region(r.id, r.polygon, strip_identity(r.map, f.epsilon)) for r in f.regions]
    return build_field("displacement", f.outer, regs, inner=f.inner,
                       h=f.h, jump_tol=f.jump_tol, validate=False)


def deformation_from_displacement(f, epsilon):
    """Deformation y = id + epsilon * u of a displacement field."""
    if f.kind != "displacement":
        raise InvalidArgumentError("expected a displacement field")
    regs = [Region(r.id, r.polygon, compose_with_identity(r.map, epsilon))
            for r in f.regions]
    return build_field("deformation", f.outer, regs, inner=f.inner,
                       epsilon=epsilon, h=f.h, jump_tol=f.jump_tol, validate=False)


# -- serialization -----------------------------------------------------------


def field_to_json(f):
    return {
        "kind": f.kind,
        "outer": f.outer.to_json(),
        "inner": f.inner.to_json(),
        "epsilon": f.epsilon,
        "h": f.h.to_json() if f.h is not None else None,
        "regions": [{"id": r.id, "polygon": r.polygon.to_json(),
                     "map": r.map.to_json()} for r in f.regions],
    }


def field_from_json(obj):
    h = RegionMap.from_json(obj["h"]) if obj.get("h") else None
    regions = [(r["id"], Polygon.from_json(r["polygon"]),
                RegionMap.from_json(r["map"])) for r in obj["regions"]]
    inner = Polygon.from_json(obj["inner"]) if obj.get("inner") else None
    return build_field(obj["kind"], Polygon.from_json(obj["outer"]), regions,
                       inner=inner, epsilon=obj.get("epsilon"), h=h)


# -- normal-jump traces as lazy piecewise polynomials ------------------------

_SMOOTHSTEP = np.polynomial.Polynomial([0.0, 0.0, 0.0, 10.0, -15.0, 6.0])


def _poly_range(poly, crits, t0, t1):
    """(min, max) of a polynomial on [t0, t1] using precomputed critical points."""
    vals = [float(poly(t0)), float(poly(t1))]
    vals += [float(poly(t)) for t in crits if t0 < t < t1]
    return min(vals), max(vals)


def _poly_roots_in(poly, t0, t1):
    coef = poly.coef  # window basis: scale-correct degeneracy guard
    if np.max(np.abs(coef[1:]), initial=0.0) <= 1e-14 * max(1.0, abs(coef[0]) if len(coef) else 1.0):
        return []
    return [float(r.real) for r in poly.roots()
            if abs(r.imag) <= 1e-9 and t0 < r.real < t1]


class EdgeJumpProfile:
    """Lazy piecewise-polynomial normal jump [u] . nu along one edge.

    The bump-free part of the traces is one exact polynomial in the edge
    parameter; each bump whose center lies on the edge line contributes an
    exact piecewise quintic (plateau / transition ring), and pieces carry
    cheap value bounds so level queries fit polynomials only where the level
    can actually be crossed.  Off-line bumps touching the edge fall back to
    a fitted approximation.
    """

    def __init__(self, f, edge):
        by_id = f.region_by_id
        self.edge = edge
        seg = edge.segment
        self.seg = seg
        self.L = seg.length
        ml = by_id[edge.left_region].map
        if edge.right_region is None:
            raise InvalidArgumentError("free crack face has no two-sided jump")
        mr = by_id[edge.right_region].map
        self.maps = (ml, mr)
        d = seg.direction

        # exact bump-free base polynomial (plain coefficient basis)
        base_deg = max(ml.degree, mr.degree)
        k = base_deg + 1
        ts = 0.5 * (1 - np.cos(np.pi * (np.arange(k) + 0.5) / k)) if k > 1 else np.array([0.5])
        pts = seg.a + ts[:, None] * (seg.b - seg.a)
        vals = (self._base_eval(ml, pts) - self._base_eval(mr, pts)) @ edge.normal
        if k == 1:
            self.base = np.polynomial.Polynomial([float(vals[0])])
        else:
            self.base = np.polynomial.Polynomial.fit(
                ts, vals, base_deg, domain=[0.0, 1.0]).convert()
        dbase = self.base.deriv()
        self.base_crits = _poly_roots_in(dbase, 0.0, 1.0) if base_deg >= 2 else []

        # bump events
        events = []  # (t_lo, t_hi, t_plat_lo, t_plat_hi, t_c, amp, scale, theta, exact, bump, sign)
        cuts = {0.0, 1.0}
        for m, sign in ((ml, 1.0), (mr, -1.0)):
            for bp in m.bumps:
                w = bp.center - seg.a
                t_c = float(np.dot(w, d)) / self.L
                off = abs(float(cross2(d, w)))
                amp = sign * bp.radius * float(np.dot(bp.vector, edge.normal))
                half = bp.radius / self.L
                t_lo, t_hi = t_c - half, t_c + half
                if t_hi <= 0.0 or t_lo >= 1.0 or off >= bp.radius:
                    continue
                exact = off <= EPS_GEOM
                ph = bp.radius * (1 - bp.theta) / self.L
                ev = (max(t_lo, 0.0), min(t_hi, 1.0), t_c - ph, t_c + ph, t_c,
                      amp, self.L / bp.radius, bp.theta, exact, bp, sign)
                events.append(ev)
                for t in (t_lo, t_hi, t_c - ph, t_c + ph):
                    if 0.0 < t < 1.0:
                        cuts.add(float(t))
        self.events = events
        cuts = sorted(cuts)
        # interval stabbing: events sorted by start, prefix max of ends
        by_lo = sorted(events, key=lambda ev: ev[0])
        ev_lo = np.array([ev[0] for ev in by_lo]) if by_lo else np.zeros(0)
        run_hi = np.maximum.accumulate([ev[1] for ev in by_lo]) if by_lo else np.zeros(0)
        self.pieces = []
        for t0, t1 in zip(cuts[:-1], cuts[1:]):
            if t1 - t0 <= 1e-15:
                continue
            mid = 0.5 * (t0 + t1)
            active = []
            j = int(np.searchsorted(ev_lo, mid + 1e-15, side="right")) - 1
            while j >= 0 and run_hi[j] >= mid - 1e-15:
                if by_lo[j][1] >= mid - 1e-15:
                    active.append(by_lo[j])
                j -= 1
            self.pieces.append((t0, t1, tuple(active)))
        self._cache = {}

    @staticmethod
    def _base_eval(m, pts):
        if m.bumps:
            return pts @ m.A.T + m.b
        return m(pts)

    # -- per-piece machinery ------------------------------------------------
    def piece_bounds(self, i):
        t0, t1, active = self.pieces[i]
        lo, hi = _poly_range(self.base, self.base_crits, t0, t1)
        for ev in active:
            amp = ev[5]
            lo += min(0.0, amp)
            hi += max(0.0, amp)
        return lo, hi

    def _restrict_base(self, t0, t1):
        """Base polynomial re-fitted on [t0, t1] with local (domain) scaling."""
        deg = max(len(self.base.coef) - 1, 0)
        if deg == 0:
            return np.polynomial.Polynomial(self.base.coef.copy(), domain=[t0, t1])
        k = deg + 1
        s = 0.5 * (1 - np.cos(np.pi * (np.arange(k) + 0.5) / k))
        ts = t0 + (t1 - t0) * s
        return np.polynomial.Polynomial.fit(ts, self.base(ts), deg, domain=[t0, t1])

    def piece_poly(self, i):
        """Piece polynomial in numpy's domain-mapped basis (domain [t0, t1]).

        The local basis keeps ring-composition coefficients of order amp;
        composing in the global parameter would lose ~scale^5 digits.
        """
        if i in self._cache:
            return self._cache[i]
        t0, t1, active = self.pieces[i]
        if not active:
            poly = self._restrict_base(t0, t1)
        elif all(ev[8] for ev in active):
            poly = self._restrict_base(t0, t1)
            mid = 0.5 * (t0 + t1)
            half = 0.5 * (t1 - t0)
            for ev in active:
                _, _, pl, ph, t_c, amp, scale, theta, _, _, _ = ev
                if pl <= mid <= ph:
                    poly = poly + amp  # plateau: phi = 1
                else:
                    sgn = 1.0 if mid > t_c else -1.0
                    # s(t) = (sgn (t - t_c) scale - (1 - theta)) / theta in the
                    # local variable z = (t - mid)/half: s = a0 + a1 z
                    a0 = (sgn * (mid - t_c) * scale - (1 - theta)) / theta
                    a1 = sgn * half * scale / theta
                    lin = np.polynomial.Polynomial([a0, a1], domain=[t0, t1])
                    poly = poly + amp * (1.0 - _SMOOTHSTEP(lin))
        else:
            deg = 12
            s = 0.5 * (1 - np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1)))
            ts = t0 + (t1 - t0) * s
            pts = self.seg.a + ts[:, None] * (self.seg.b - self.seg.a)
            ml, mr = self.maps
            vals = (ml(pts) - mr(pts)) @ self.edge.normal
            poly = np.polynomial.Polynomial.fit(ts, vals, deg, domain=[t0, t1])
        self._cache[i] = poly
        return poly

    # -- queries -------------------------------------------------------------
    def min_value(self):
        best = np.inf
        deferred = []
        for i, (t0, t1, active) in enumerate(self.pieces):
            if active:
                deferred.append(i)
                continue
            lo, _ = _poly_range(self.base, self.base_crits, t0, t1)
            best = min(best, lo)
        for i in sorted(deferred, key=lambda j: self.piece_bounds(j)[0]):
            lo, _ = self.piece_bounds(i)
            if lo >= best:
                break
            poly = self.piece_poly(i)
            t0, t1, _ = self.pieces[i]
            cands = [t0, t1] + _poly_roots_in(poly.deriv(), t0, t1)
            best = min(best, min(float(poly(t)) for t in cands))
        return float(best)

    def sublevel(self, level):
        """Parameter intervals where the normal jump is <= level."""
        out = []
        for i, (t0, t1, active) in enumerate(self.pieces):
            lo, hi = self.piece_bounds(i)
            if lo > level:
                continue
            if hi <= level:
                out.append((t0, t1))
                continue
            poly = self.piece_poly(i) - level
            coef = poly.convert().coef
            if np.max(np.abs(coef), initial=0.0) <= 1e-14:
                out.append((t0, t1))
                continue
            rs = sorted({t0, t1} | set(_poly_roots_in(poly, t0, t1)))
            for lo_t, hi_t in zip(rs[:-1], rs[1:]):
                if float(poly(0.5 * (lo_t + hi_t))) <= 0:
                    out.append((lo_t, hi_t))
        from .geom2d import merge_intervals

        return merge_intervals(out, tol=0.0)

    def materialize(self):
        return [(t0, t1, self.piece_poly(i))
                for i, (t0, t1, _) in enumerate(self.pieces)]


def edge_jump_profile(f, edge):
    return EdgeJumpProfile(f, edge)


def normal_jump_pieces(f, edge):
    """[u] . nu along an edge as (t0, t1, Polynomial) pieces on [0, 1]."""
    return EdgeJumpProfile(f, edge).materialize()
