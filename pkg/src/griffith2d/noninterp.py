"""Non-interpenetration diagnostics: measure-theoretic images, the
Ciarlet-Necas inequality, the linearized contact condition, thresholded bad
jump sets, and the blow-up window evaluator/verifier.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
from shapely import STRtree
from shapely.geometry import LineString
from shapely.geometry import Polygon as _ShPolygon

from .errors import InvalidArgumentError, MapFoldingError, WindowError
from .fields import DISPLACEMENT_JUMP
from .geom2d import (
    cross2,
    EPS_GEOM,
    Polygon,
    PolygonSet,
    Segment,
    canonical_line,
    group_collinear,
    merge_intervals,
    perp,
    subtract_interval_lists,
    vec2,
)
from .quadrature import quad_points, triangulate_shapely

CN_TOL_FACTOR = 1e-6
IMG_TOL_FACTOR = 1e-4
DET_MARGIN = 1e-10


@dataclass(frozen=True)
class CnReport:
    integral_det: float
    image_area: float
    det_positive: bool
    max_pairwise_overlap: float
    cn_tol: float

    @property
    def gap(self):
        return self.integral_det - self.image_area

    @property
    def passed(self):
        return self.det_positive and self.gap <= self.cn_tol

    def to_json(self):
        return {"integral_det": self.integral_det, "image_area": self.image_area,
                "gap": self.gap, "det_positive": self.det_positive,
                "max_pairwise_overlap": self.max_pairwise_overlap,
                "cn_tol": self.cn_tol, "pass": self.passed}


@dataclass(frozen=True)
class CcReport:
    min_normal_jump: float
    violation_length: float
    jump_length: float
    marginal_length: dict
    length_tol: float

    @property
    def passed(self):
        return self.violation_length <= self.length_tol

    def to_json(self):
        return {"min_normal_jump": self.min_normal_jump,
                "violation_length": self.violation_length,
                "jump_length": self.jump_length,
                "marginal_length": {f"{k:.17g}": v for k, v in self.marginal_length.items()},
                "length_tol": self.length_tol, "pass": self.passed}


@dataclass(frozen=True)
class BlowupReport:
    center: np.ndarray
    rho: float
    frame_normal: np.ndarray
    jump_in_window: float
    deviation_area_plus: float
    deviation_area_minus: float
    deviation_undecided: float
    strain_energy: float
    eta: float
    C_eta: float
    cbar: float
    flags: tuple  # (a, b, c) each True / False / None (undecided)

    @property
    def rhs(self):
        return (self.rho * (1 + self.eta),
                self.rho**2 * self.eta**4,
                self.rho * self.eta**2 / (self.C_eta**2 * self.cbar**2))

    def to_json(self):
        names = {True: "pass", False: "fail", None: "undecided"}
        return {"center": self.center.tolist(), "rho": self.rho,
                "frame_normal": self.frame_normal.tolist(),
                "jump_in_window": self.jump_in_window,
                "deviation_area_plus": self.deviation_area_plus,
                "deviation_area_minus": self.deviation_area_minus,
                "deviation_undecided": self.deviation_undecided,
                "strain_energy": self.strain_energy,
                "eta": self.eta, "C_eta": self.C_eta, "cbar": self.cbar,
                "rhs": list(self.rhs),
                "flags": [names[f] for f in self.flags]}


# ---------------------------------------------------------------------------
# measure-theoretic image


def _affine_image(m, geom):
    A, b = m.A, m.b
    mat = [A[0, 0], A[0, 1], A[1, 0], A[1, 1], b[0], b[1]]
    return shapely.affinity.affine_transform(geom, mat)


def _refine_arc(m, a, b, img_tol, depth=0):
    """Adaptively sample an edge so the image polyline chord error <= img_tol."""
    mid = 0.5 * (a + b)
    img_mid = m(mid)
    chord_mid = 0.5 * (m(a) + m(b))
    if depth >= 16 or np.linalg.norm(img_mid - chord_mid) <= img_tol:
        return [b]
    return _refine_arc(m, a, mid, img_tol, depth + 1) + _refine_arc(m, mid, b, img_tol, depth + 1)


def _mapped_ring(m, ring, img_tol):
    pts = []
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        pts.append(a)
        sub = _refine_arc(m, a, b, img_tol)
        pts.extend(sub[:-1])
    return np.asarray(m(np.asarray(pts)))


def _map_piece(m, geom, img_tol, region_id, min_det):
    """Image of a polygonal piece under a region map."""
    if min_det is not None and min_det <= DET_MARGIN:
        raise MapFoldingError("non-positive jacobian determinant in region",
                              region=region_id, min_det=min_det)
    if m.is_affine:
        return _affine_image(m, geom)
    pieces = [geom] if geom.geom_type == "Polygon" else list(geom.geoms)
    out = []
    for g in pieces:
        if g.geom_type != "Polygon" or g.area <= EPS_GEOM:
            continue
        ext = _mapped_ring(m, np.asarray(g.exterior.coords)[:-1], img_tol)
        shell = _ShPolygon(ext)
        if not shell.is_valid or shell.area <= 0:
            raise MapFoldingError(
                "mapped region boundary is not simple (fold detected)",
                region=region_id)
        holes = []
        for ring in g.interiors:
            holes.append(_mapped_ring(m, np.asarray(ring.coords)[:-1], img_tol))
        out.append(_ShPolygon(ext, holes))
    return shapely.union_all(out) if out else _ShPolygon()


def _region_min_det(region, order=5):
    m = region.map
    if m.is_affine:
        return float(np.linalg.det(m.A))
    from .energy import region_pieces
    from .quadrature import ear_clip

    min_det = np.inf
    for tris, signs, mm, affine_exact in region_pieces(region):
        if affine_exact:
            min_det = min(min_det, float(np.linalg.det(mm.A)))
            continue
        if tris is None:
            tris = ear_clip(region.polygon.vertices)
        pts, _ = quad_points(tris, order)
        det = np.linalg.det(mm.grad(pts.reshape(-1, 2)))
        min_det = min(min_det, float(det.min()))
    return min_det


def region_images(y, E=None, img_tol=None):
    """Per-region images of region-and-E intersections as shapely geometries."""
    img_tol = IMG_TOL_FACTOR * y.diameter if img_tol is None else img_tol
    clip = None
    if E is not None:
        clip = E.shapely() if isinstance(E, (PolygonSet, Polygon)) else E
    images = []
    for r in y.regions:
        geom = r.polygon.shapely()
        if clip is not None:
            geom = geom.intersection(clip)
            if geom.area <= EPS_GEOM:
                images.append((r.id, _ShPolygon()))
                continue
        images.append((r.id, _map_piece(r.map, geom, img_tol, r.id,
                                        _region_min_det(r))))
    return images


def measure_image(y, E=None, img_tol=None):
    """(area, image PolygonSet) of the measure-theoretic image of E under y."""
    if y.kind != "deformation":
        raise InvalidArgumentError("measure_image expects a deformation field")
    images = region_images(y, E, img_tol)
    union = shapely.union_all([g for _, g in images])
    return float(union.area), PolygonSet.from_shapely(union)


def integrate_det_over(y, E=None, order=7):
    """(integral of det grad y over E, min det sample) clipped to E."""
    from .energy import region_pieces
    from .quadrature import ear_clip

    clip = None
    if E is not None:
        clip = E.shapely() if isinstance(E, (PolygonSet, Polygon)) else E
    total = 0.0
    min_det = np.inf
    for r in y.regions:
        geom = r.polygon.shapely()
        area_full = geom.area
        if clip is not None:
            geom = geom.intersection(clip)
        if geom.area <= EPS_GEOM * max(area_full, 1.0):
            continue
        if r.map.is_affine:
            det = float(np.linalg.det(r.map.A))
            total += det * geom.area
            min_det = min(min_det, det)
            continue
        tris, signs = triangulate_shapely(geom)
        pts, wts = quad_points(tris, order)
        det = np.linalg.det(r.map.grad(pts.reshape(-1, 2))).reshape(pts.shape[:2])
        if signs is not None:
            wts = wts * np.asarray(signs)[:, None]
        total += float(np.sum(det * wts))
        min_det = min(min_det, float(det.min()))
    return total, min_det


def cn_check(y, cn_tol=None, img_tol=None, order=7):
    """Ciarlet-Necas non-interpenetration report on the inner domain."""
    if y.kind != "deformation":
        raise InvalidArgumentError("cn_check expects a deformation field")
    cn_tol = CN_TOL_FACTOR * y.outer.area if cn_tol is None else cn_tol
    E = y.inner
    integral, min_det = integrate_det_over(y, E, order)
    images = region_images(y, E, img_tol)
    geoms = [g for _, g in images if not g.is_empty]
    union = shapely.union_all(geoms)
    overlap = 0.0
    if len(geoms) > 1:
        tree = STRtree(geoms)
        for i, g in enumerate(geoms):
            for j in tree.query(g):
                j = int(j)
                if j > i:
                    overlap = max(overlap, g.intersection(geoms[j]).area)
    return CnReport(
        integral_det=integral,
        image_area=float(union.area),
        det_positive=bool(min_det > DET_MARGIN),
        max_pairwise_overlap=overlap,
        cn_tol=cn_tol,
    )


# ---------------------------------------------------------------------------
# contact condition


def _sublevel(profile, level, strict=False):
    """Parameter intervals with jump <= level (or < level when strict)."""
    out = []
    for i, (t0, t1, _) in enumerate(profile.pieces):
        lo, hi = profile.piece_bounds(i)
        if lo > level:
            continue
        if (hi < level) or (hi <= level and not strict):
            out.append((t0, t1))
            continue
        poly = profile.piece_poly(i) - level
        if np.max(np.abs(poly.coef), initial=0.0) <= 1e-14:
            if not strict:
                out.append((t0, t1))
            continue
        rs = sorted({t0, t1} | {float(r.real) for r in poly.roots()
                                if abs(r.imag) <= 1e-9 and t0 < r.real < t1})
        # noise floor: tangential roots perturb into tiny spurious sign flips
        floor = 1e-12 * float(np.abs(poly.coef).max()) if strict else 0.0
        for lo_t, hi_t in zip(rs[:-1], rs[1:]):
            if float(poly(0.5 * (lo_t + hi_t))) < -floor:
                out.append((lo_t, hi_t))
    return merge_intervals(out, tol=0.0)


def cc_check(u, cc_tol=0.0, thresholds=(), length_tol=1e-9):
    """Contact-condition report: violation length of {[u].nu < -cc_tol} and
    a threshold table of sub-level lengths, by per-edge root isolation."""
    if u.kind != "displacement":
        raise InvalidArgumentError("cc_check expects a displacement field")
    from .fields import edge_jump_profile

    min_jump = np.inf
    violation = 0.0
    total_jump = 0.0
    marginal = {float(t): 0.0 for t in thresholds}
    for e in u.edges:
        if e.classification != DISPLACEMENT_JUMP or e.right_region is None:
            continue
        L = e.length
        total_jump += L
        prof = edge_jump_profile(u, e)
        min_jump = min(min_jump, prof.min_value())
        for lo, hi in _sublevel(prof, -cc_tol, strict=True):
            violation += (hi - lo) * L
        for tau in marginal:
            for lo, hi in _sublevel(prof, tau):
                marginal[tau] += (hi - lo) * L
    if not np.isfinite(min_jump):
        min_jump = 0.0
    return CcReport(
        min_normal_jump=float(min_jump),
        violation_length=violation,
        jump_length=total_jump,
        marginal_length=marginal,
        length_tol=length_tol,
    )


def bad_jump_set(u, tau):
    """Maximal sub-segments of the crack where [u].nu <= tau, plus total length."""
    if not tau > 0:
        raise InvalidArgumentError("tau must be positive", tau=tau)
    from .fields import edge_jump_profile

    segments = []
    total = 0.0
    for e in u.edges:
        if e.classification != DISPLACEMENT_JUMP or e.right_region is None:
            continue
        prof = edge_jump_profile(u, e)
        for lo, hi in merge_intervals(_sublevel(prof, tau), tol=1e-12):
            seg = Segment(e.segment.point(lo), e.segment.point(hi))
            segments.append(seg)
            total += seg.length
    return segments, total


# ---------------------------------------------------------------------------
# blow-up window analysis


def window_polygon(x0, rho, frame_normal):
    x0 = vec2(x0)
    e1 = vec2(frame_normal)
    e1 = e1 / np.linalg.norm(e1)
    e2 = perp(e1)
    h = 0.5 * rho
    return Polygon([x0 - h * e1 - h * e2, x0 + h * e1 - h * e2,
                    x0 + h * e1 + h * e2, x0 - h * e1 + h * e2]), e1, e2


def _affine_norm_extrema(A, c, tri):
    """(min, max) of |A x + c| over a triangle (exact, by convexity)."""
    vals = np.linalg.norm(tri @ A.T + c, axis=1)
    vmax = float(vals.max())
    best = float(vals.min())
    # unconstrained minimizer of the quadratic
    G = A.T @ A
    rhs = -A.T @ c
    try:
        xs = np.linalg.solve(G, rhs)
        if _point_in_tri(xs, tri):
            best = min(best, float(np.linalg.norm(A @ xs + c)))
    except np.linalg.LinAlgError:
        pass
    for k in range(3):
        p, q = tri[k], tri[(k + 1) % 3]
        w = A @ (q - p)
        ww = float(w @ w)
        if ww > 0:
            t = float(-((A @ p + c) @ w) / ww)
            if 0.0 < t < 1.0:
                best = min(best, float(np.linalg.norm(A @ (p + t * (q - p)) + c)))
    return best, vmax


def _point_in_tri(p, tri):
    a, b, c = tri
    d1 = cross2(b - a, p - a)
    d2 = cross2(c - b, p - b)
    d3 = cross2(a - c, p - c)
    return (d1 >= -1e-15) and (d2 >= -1e-15) and (d3 >= -1e-15)


def _exceed_area_tri(m, omega, thr, tri, depth):
    """Interval [lo, hi] of area{ |m - omega| > thr } within one triangle."""
    area = 0.5 * abs(float(cross2(tri[1] - tri[0], tri[2] - tri[0])))
    if area <= 0:
        return 0.0, 0.0
    ab = m.try_affine()
    if ab is not None:
        lo, hi = _affine_norm_extrema(ab[0], ab[1] - omega, tri)
        if hi <= thr:
            return 0.0, 0.0
        if lo > thr:
            return area, area
    if depth <= 0:
        return 0.0, area
    a, b, c = tri
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    lo = hi = 0.0
    for sub in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)):
        slo, shi = _exceed_area_tri(m, omega, thr, np.array(sub), depth - 1)
        lo += slo
        hi += shi
    return lo, hi


def exceed_area(pieces, omega, thr, depth=8):
    """[lo, hi] of area{ |v - omega| > thr } over (map, geometry) pieces."""
    lo = hi = 0.0
    for m, geom in pieces:
        tris, signs = triangulate_shapely(geom)
        for tri, sign in zip(tris, signs):
            tlo, thi = _exceed_area_tri(m, vec2(omega), thr, tri, depth)
            if sign > 0:
                lo += tlo
                hi += thi
            else:
                lo -= thi
                hi -= tlo
    return max(lo, 0.0), max(hi, 0.0)


def _clip_pieces(v, clip_geom):
    # floor far below the rho^2 eta^4 deviation scale so slivers survive
    floor = max(1e-18, 1e-16 * clip_geom.area)
    pieces = []
    for r in v.regions:
        g = r.polygon.shapely().intersection(clip_geom)
        if g.area > floor:
            pieces.append((r.map, g))
    return pieces


def jump_length_in(v, geom):
    total = 0.0
    for e in v.edges:
        if e.classification != DISPLACEMENT_JUMP:
            continue
        inter = LineString([e.segment.a, e.segment.b]).intersection(geom)
        total += float(inter.length)
    return total


def strain_energy_in(v, geom, order=7):
    from .energy import sym

    total = 0.0
    for m, g in _clip_pieces(v, geom):
        tris, signs = triangulate_shapely(g)
        pts, wts = quad_points(tris, order)
        e = sym(m.grad(pts.reshape(-1, 2)))
        vals = np.sum(e * e, axis=(-2, -1)).reshape(pts.shape[:2])
        if signs is not None:
            wts = wts * np.asarray(signs)[:, None]
        total += float(np.sum(vals * wts))
    return total


def blowup_hypotheses(v, x0, rho, frame_normal, omega_plus, omega_minus,
                      eta, C_eta=1.0, cbar=1.0, depth=8):
    """Evaluate the three blow-up window hypotheses for a displacement field.

    Left-hand sides: jump length in the window, deviation areas from the
    two-sided constants in the half-windows, and the strain energy; flags
    compare against rho(1+eta), rho^2 eta^4 and rho eta^2/(C_eta^2 cbar^2).
    """
    omega_plus, omega_minus = vec2(omega_plus), vec2(omega_minus)
    if not 0 < rho <= 1:
        raise InvalidArgumentError("rho must lie in (0, 1]", rho=rho)
    sep = float(np.linalg.norm(omega_plus - omega_minus))
    if not 0 < eta <= min(sep / 7.0, 1e-4):
        raise InvalidArgumentError(
            "eta must satisfy 0 < eta <= min(|omega+ - omega-|/7, 1e-4)",
            eta=eta, separation=sep)
    if C_eta < 1 or cbar < 1:
        raise InvalidArgumentError("C_eta and cbar must be >= 1",
                                   C_eta=C_eta, cbar=cbar)
    window, e1, e2 = window_polygon(x0, rho, frame_normal)
    wsh = window.shapely()
    if wsh.area - wsh.intersection(v.outer.shapely()).area > EPS_GEOM:
        raise WindowError("blow-up window not contained in the outer domain",
                          center=vec2(x0), rho=rho)
    jump = jump_length_in(v, wsh)
    x0 = vec2(x0)
    half = 0.5 * rho
    plus_half = _ShPolygon([x0 - half * e2, x0 + half * e1 - half * e2,
                            x0 + half * e1 + half * e2, x0 + half * e2])
    minus_half = _ShPolygon([x0 - half * e1 - half * e2, x0 - half * e2,
                             x0 + half * e2, x0 - half * e1 + half * e2])
    thr = eta / cbar
    lo_p, hi_p = exceed_area(_clip_pieces(v, plus_half), omega_plus, thr, depth)
    lo_m, hi_m = exceed_area(_clip_pieces(v, minus_half), omega_minus, thr, depth)
    strain = strain_energy_in(v, wsh)
    rhs_a = rho * (1 + eta)
    rhs_b = rho**2 * eta**4
    rhs_c = rho * eta**2 / (C_eta**2 * cbar**2)
    flag_a = jump <= rhs_a
    dev_lo, dev_hi = lo_p + lo_m, hi_p + hi_m
    if dev_hi <= rhs_b:
        flag_b = True
    elif dev_lo > rhs_b:
        flag_b = False
    else:
        flag_b = None
    flag_c = strain <= rhs_c
    return BlowupReport(
        center=x0, rho=rho, frame_normal=e1,
        jump_in_window=jump,
        deviation_area_plus=lo_p, deviation_area_minus=lo_m,
        deviation_undecided=dev_hi - dev_lo,
        strain_energy=strain,
        eta=eta, C_eta=C_eta, cbar=cbar,
        flags=(flag_a, flag_b, flag_c),
    )


# ---------------------------------------------------------------------------
# structural-conclusion verifier


def _sup_deviation(pieces, omega):
    """(max |v - omega|, certified) over (map, geometry) pieces."""
    best = 0.0
    certified = True
    for m, geom in pieces:
        tris, signs = triangulate_shapely(geom)
        for tri, sign in zip(tris, signs):
            if sign < 0:
                continue
            ab = m.try_affine()
            if ab is not None:
                _, vmax = _affine_norm_extrema(ab[0], ab[1] - omega, tri)
            else:
                pts, _ = quad_points(tri[None], 6)
                pts = np.vstack([pts.reshape(-1, 2), tri])
                vmax = float(np.linalg.norm(m(pts) - omega, axis=1).max())
                certified = False
            best = max(best, vmax)
    return best, certified


def _ring_edges(ps):
    segs = []
    for p in (*ps.outer, *ps.holes):
        vs = p.vertices
        for i in range(len(vs)):
            segs.append((vs[i], vs[(i + 1) % len(vs)]))
    return segs


def _window_frame_coords(p, x0, e1, e2):
    d = np.asarray(p, float) - x0
    return float(d @ e1), float(d @ e2)


def dpm_conclusion_check(v, x0, rho, frame_normal, D_plus, D_minus,
                         omega_plus, omega_minus, eta):
    """Verify the structural conclusions on a candidate window partition.

    (i) sup-norm bounds |v - omega(+/-)| <= 3 eta on D(+/-); (ii) the part of
    the D boundaries off the jump set inside the window measures at most
    6 eta rho; (iii) each D side's boundary contains a polyline crossing the
    window from bottom to top.  Returns a structured verdict per conclusion.
    """
    window, e1, e2 = window_polygon(x0, rho, frame_normal)
    wsh = window.shapely()
    x0 = vec2(x0)
    results = {}
    # (i) sup-norm bounds
    sup = {}
    for name, D, omega in (("plus", D_plus, omega_plus), ("minus", D_minus, omega_minus)):
        pieces = []
        dsh = D.shapely()
        for r in v.regions:
            g = r.polygon.shapely().intersection(dsh)
            if g.area > EPS_GEOM:
                pieces.append((r.map, g))
        val, certified = _sup_deviation(pieces, vec2(omega))
        sup[name] = {"sup": val, "bound": 3 * eta, "ok": val <= 3 * eta,
                     "certified": certified}
    results["sup_bounds"] = sup

    # (ii) free-boundary length: (bd D+ union bd D-) minus J_v, inside window
    jump_segs = [e.segment for e in v.edges
                 if e.classification == DISPLACEMENT_JUMP]
    window_edges = [Segment(window.vertices[i], window.vertices[(i + 1) % 4])
                    for i in range(4)]
    arcs = []
    for D in (D_plus, D_minus):
        for a, b in _ring_edges(D):
            piece = LineString([a, b]).intersection(wsh)
            geoms = []
            if piece.geom_type == "LineString" and piece.length > EPS_GEOM:
                geoms = [piece]
            elif piece.geom_type == "MultiLineString":
                geoms = [g for g in piece.geoms if g.length > EPS_GEOM]
            for g in geoms:
                coords = np.asarray(g.coords)
                for k in range(len(coords) - 1):
                    arcs.append(Segment(coords[k], coords[k + 1]))
    free_len = 0.0
    if arcs:
        all_segs = arcs + window_edges + jump_segs
        n_arc, n_win = len(arcs), len(window_edges)
        for group in group_collinear(all_segs):
            d, _, _ = canonical_line(all_segs[group[0]].a, all_segs[group[0]].b)
            iv_arc, iv_win, iv_jump = [], [], []
            for i in group:
                s = all_segs[i]
                t0, t1 = float(np.dot(s.a, d)), float(np.dot(s.b, d))
                iv = (min(t0, t1), max(t0, t1))
                if i < n_arc:
                    iv_arc.append(iv)
                elif i < n_arc + n_win:
                    iv_win.append(iv)
                else:
                    iv_jump.append(iv)
            # interior = off the window boundary; free = also off the jump set
            interior = subtract_interval_lists(iv_arc, iv_win)
            for lo, hi in subtract_interval_lists(interior, iv_jump):
                free_len += hi - lo
    results["free_boundary"] = {"length": free_len, "bound": 6 * eta * rho,
                                "ok": free_len <= 6 * eta * rho}

    # (iii) crossing curves per side
    crossing = {}
    for name, D in (("plus", D_plus), ("minus", D_minus)):
        crossing[name] = _has_crossing_curve(D, window, x0, e1, e2, rho)
    results["crossing_curves"] = crossing
    results["ok"] = (sup["plus"]["ok"] and sup["minus"]["ok"]
                     and results["free_boundary"]["ok"]
                     and crossing["plus"] and crossing["minus"])
    return results


def _has_crossing_curve(D, window, x0, e1, e2, rho):
    """Does bd D contain a polyline from the open bottom edge to the open top?"""
    wsh = window.shapely()
    window_edges = [Segment(window.vertices[i], window.vertices[(i + 1) % 4])
                    for i in range(4)]
    arcs = []
    for a, b in _ring_edges(D):
        piece = LineString([a, b]).intersection(wsh)
        geoms = []
        if piece.geom_type == "LineString" and piece.length > EPS_GEOM:
            geoms = [piece]
        elif piece.geom_type == "MultiLineString":
            geoms = [g for g in piece.geoms if g.length > EPS_GEOM]
        for g in geoms:
            coords = np.asarray(g.coords)
            for k in range(len(coords) - 1):
                arcs.append(Segment(coords[k], coords[k + 1]))
    if not arcs:
        return False
    # strip parts lying on the window boundary itself
    interior_arcs = []
    all_segs = arcs + window_edges
    n_arc = len(arcs)
    for group in group_collinear(all_segs):
        d, n_vec, c_off = canonical_line(all_segs[group[0]].a, all_segs[group[0]].b)
        iv_arc, iv_win = [], []
        for i in group:
            s = all_segs[i]
            t0, t1 = float(np.dot(s.a, d)), float(np.dot(s.b, d))
            iv = (min(t0, t1), max(t0, t1))
            (iv_arc if i < n_arc else iv_win).append(iv)
        for lo, hi in subtract_interval_lists(iv_arc, iv_win):
            interior_arcs.append(Segment(lo * d + c_off * n_vec, hi * d + c_off * n_vec))
    if not interior_arcs:
        return False
    # graph over merged endpoints
    pts = []
    for s in interior_arcs:
        pts.extend([s.a, s.b])
    pts = np.asarray(pts)
    labels = -np.ones(len(pts), dtype=int)
    reps = []
    for i, p in enumerate(pts):
        for j, q in enumerate(reps):
            if np.linalg.norm(p - q) <= 10 * EPS_GEOM:
                labels[i] = j
                break
        else:
            labels[i] = len(reps)
            reps.append(p)
    parent = list(range(len(reps)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for k in range(len(interior_arcs)):
        a, b = labels[2 * k], labels[2 * k + 1]
        parent[find(a)] = find(b)
    half = 0.5 * rho
    touches_bottom = {}
    touches_top = {}
    for j, p in enumerate(reps):
        xi, zeta = _window_frame_coords(p, x0, e1, e2)
        comp = find(j)
        if abs(zeta + half) <= 10 * EPS_GEOM and abs(xi) < half - EPS_GEOM:
            touches_bottom[comp] = True
        if abs(zeta - half) <= 10 * EPS_GEOM and abs(xi) < half - EPS_GEOM:
            touches_top[comp] = True
    return any(comp in touches_top for comp in touches_bottom)
