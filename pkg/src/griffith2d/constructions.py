"""Generators for the counterexample sequences, the contact strengthener,
the recovery-sequence construction, asymptotic-representation reports and
epsilon-sweep harnessing.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import shapely
from numpy.polynomial.legendre import leggauss
from shapely.geometry import LineString

from .energy import EnergyParams, linear_energy, nonlinear_energy, sym
from .errors import (
    BoundaryReachError,
    CoverError,
    InvalidArgumentError,
    PartitionError,
)
from .fields import (
    DISPLACEMENT_JUMP,
    Bump,
    Region,
    RegionMap,
    build_field,
    bump_profile_d1,
    bump_max_slope,
    compose_with_identity,
    induced_displacement,
    jump_length,
)
from .geom2d import (
    EPS_GEOM,
    Polygon,
    PolygonSet,
    Segment,
    group_collinear,
    canonical_line,
    merge_intervals,
    perp,
    vec2,
)
from .noninterp import bad_jump_set, cc_check, cn_check, exceed_area
from .quadrature import quad_points


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    jump_length: float
    bulk: float
    second_gradient: float
    surface: float
    total: float | None
    cn_gap: float
    cc_min: float
    notes: str

    FIELDS = ("epsilon", "jump_length", "bulk", "second_gradient", "surface",
              "total", "cn_gap", "cc_min", "notes")

    def to_json(self):
        return {k: getattr(self, k) for k in self.FIELDS}


@dataclass(frozen=True)
class RecoveryParams:
    tau: float
    epsilon: float
    beta: float
    gamma: float
    translation_margin: float | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidArgumentError("tau must be positive", tau=self.tau)
        if not self.epsilon > 0:
            raise InvalidArgumentError("epsilon must be positive", epsilon=self.epsilon)
        if not 2.0 / 3.0 < self.beta < 1.0:
            raise InvalidArgumentError("beta must lie in (2/3, 1)", beta=self.beta)
        if not 2.0 / 3.0 < self.gamma < self.beta:
            raise InvalidArgumentError("gamma must lie in (2/3, beta)",
                                       gamma=self.gamma, beta=self.beta)


# ---------------------------------------------------------------------------
# counterexample sequences


def example_basic(epsilon):
    """Three-strip deformation on (-1,1)^2 whose rescaled displacements
    converge to a compressive one-jump limit.

    Returns (y_epsilon, u_limit): the deformation satisfies CN with three
    pairwise-disjoint strip images, the limit violates the contact condition.
    """
    if not 0 < epsilon < 0.25:
        raise InvalidArgumentError("epsilon must lie in (0, 1/4)", epsilon=epsilon)
    outer = Polygon.rectangle(-1, -1, 1, 1)
    eye = np.eye(2)
    y = build_field("deformation", outer, [
        (0, Polygon.rectangle(-1, -1, -2 * epsilon, 1), RegionMap.identity()),
        (1, Polygon.rectangle(-2 * epsilon, -1, 0, 1),
         RegionMap.affine(eye, [2.0, 0.0])),
        (2, Polygon.rectangle(0, -1, 1, 1),
         RegionMap.affine(eye, [-epsilon, 0.0])),
    ], epsilon=epsilon)
    u_limit = build_field("displacement", outer, [
        (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.constant([0.0, 0.0])),
        (1, Polygon.rectangle(0, -1, 1, 1), RegionMap.constant([-1.0, 0.0])),
    ])
    return y, u_limit


def example_staircase(epsilon, mu):
    """Staircase deformation whose jump lengths converge to 3 + 2|mu1|/|mu2|.

    n = floor(1/(eps |mu2|)) small rectangles straddle the limiting jump
    line; the displacement is (mu1/2, mu2) on the right bulk, 2/eps e1 on the
    rectangles and 0 on the left bulk.  Returns (y_epsilon, limit length).
    """
    mu = vec2(mu)
    if not (mu[0] < 0 and mu[1] < 0):
        raise InvalidArgumentError("mu must have negative components", mu=mu)
    m1, m2 = abs(mu[0]), abs(mu[1])
    n = math.floor(1.0 / (epsilon * m2))
    w = epsilon * m1 / 2.0
    h = epsilon * m2
    if n < 1 or w >= 1.0 or -1 + (2 * n - 1) * h > 1.0 + EPS_GEOM:
        raise InvalidArgumentError("epsilon too large for the staircase geometry",
                                   epsilon=epsilon, n=n)
    ys = [-1 + 2 * k * h for k in range(n)]

    left = [(-1.0, -1.0), (-w, -1.0)]
    for k, y0 in enumerate(ys):
        y1 = y0 + h
        if k > 0:
            left += [(0.0, y0), (-w, y0)]
        left += [(-w, y1), (0.0, y1)]
    left += [(0.0, 1.0), (-1.0, 1.0)]

    right = [(w, -1.0), (1.0, -1.0), (1.0, 1.0), (0.0, 1.0)]
    for k in range(n - 1, -1, -1):
        y0 = ys[k]
        y1 = y0 + h
        right += [(0.0, y1), (w, y1), (w, y0)]
        if k > 0:
            right += [(0.0, y0)]
    outer = Polygon.rectangle(-1, -1, 1, 1)
    regions = [
        (0, Polygon(left), RegionMap.constant([0.0, 0.0])),
        (1, Polygon(right), RegionMap.constant([mu[0] / 2.0, mu[1]])),
    ]
    for k, y0 in enumerate(ys):
        regions.append((2 + k, Polygon.rectangle(-w, y0, w, y0 + h),
                        RegionMap.constant([2.0 / epsilon, 0.0])))
    u = build_field("displacement", outer, regions)
    y = deformation_of(u, epsilon)
    return y, 3.0 + 2.0 * m1 / m2


def deformation_of(u, epsilon):
    regs = [Region(r.id, r.polygon, compose_with_identity(r.map, epsilon))
            for r in u.regions]
    return build_field("deformation", u.outer, regs, inner=u.inner,
                       epsilon=epsilon, h=u.h, validate=False)


def opening_twin(alpha=0.0, opening=1.0):
    """Displacement on (-1,1)^2 opening across the vertical crack {0}x(-1,1).

    With alpha > 0 a continuous quadratic part alpha (x1^2, x2^2) is added on
    both sides, giving closed-form energy 32 alpha^2 / 3 + 2 kappa while
    keeping the normal jump equal to ``opening`` along the whole crack.
    """
    outer = Polygon.rectangle(-1, -1, 1, 1)
    if alpha == 0.0:
        maps = [RegionMap.constant([0.0, 0.0]),
                RegionMap.constant([opening, 0.0])]
    else:
        c = np.zeros((2, 3, 3))
        c[0, 2, 0] = alpha
        c[1, 0, 2] = alpha
        cl = c.copy()
        cr = c.copy()
        cr[0, 0, 0] = opening
        maps = [RegionMap.polynomial(cl), RegionMap.polynomial(cr)]
    return build_field("displacement", outer, [
        (0, Polygon.rectangle(-1, -1, 0, 1), maps[0]),
        (1, Polygon.rectangle(0, -1, 1, 1), maps[1]),
    ])


def opening_twin_energy(alpha, kappa):
    """Closed-form linearized energy of the (possibly enriched) opening twin."""
    return 32.0 * alpha**2 / 3.0 + 2.0 * kappa


def sliding_twin(shift=1.0):
    """Tangential slide (0, shift) across the vertical crack: [u].nu = 0."""
    outer = Polygon.rectangle(-1, -1, 1, 1)
    return build_field("displacement", outer, [
        (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.constant([0.0, 0.0])),
        (1, Polygon.rectangle(0, -1, 1, 1), RegionMap.constant([0.0, shift])),
    ])


# ---------------------------------------------------------------------------
# contact strengthener


def _point_segment_distance(points, a, b):
    """Distances from an (m, 2) point batch to the segment [a, b]."""
    d = b - a
    L2 = float(d @ d)
    t = np.clip((points - a) @ d / L2, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.linalg.norm(points - proj, axis=1)


def _half_disc_strain_factor(theta, n=64):
    """int over the unit half-disc of |sym(nu x e_r)|^2 phi'(r)^2."""
    x, wts = leggauss(n)
    r = 0.5 * ((x + 1) * theta) + (1 - theta)  # transition ring [1-theta, 1]
    wr = wts * theta / 2
    radial = float(np.sum(bump_profile_d1(r, theta) ** 2 * r * wr))
    # angular factor of |sym(nu x e_r)|^2 over a half circle: 3 pi / 4
    return 0.75 * np.pi * radial


def strengthen_contact(u, theta):
    """Add plateau bumps on the plus side of every jump edge.

    Covers each crack edge by a chain of disjoint discs centered on it with
    radii at most min(theta^3, theta L / (5 (1 + H1(J_u)))), shrunk further to
    clear all other edges, and adds the translation
    radius * phi(|x - center|/radius) * nu to the plus-side region map.
    Returns (u_bar, tau_bar, report); tau_bar = (1-theta)/2 * min radius.
    """
    if not 0 < theta <= 0.5:
        raise InvalidArgumentError("theta must lie in (0, 1/2]", theta=theta)
    if u.kind != "displacement":
        raise InvalidArgumentError("strengthen_contact expects a displacement field")
    jump_edges = [e for e in u.edges
                  if e.classification == DISPLACEMENT_JUMP and e.right_region is not None]
    if not jump_edges:
        return u, None, {"bumps": 0, "coverage": 1.0, "sup_diff": 0.0,
                         "e_diff_l2": 0.0, "jump_symdiff": 0.0}
    total_jump = sum(e.length for e in jump_edges)

    datum_zone = None
    if u.inner is not u.outer and u.inner.shapely().area < u.outer.shapely().area - EPS_GEOM:
        datum_zone = u.outer.shapely().difference(u.inner.shapely())

    obstacle_segments = []
    for e in u.edges:
        obstacle_segments.append(e.segment)
    vs = u.outer.vertices
    for i in range(len(vs)):
        obstacle_segments.append(Segment(vs[i], vs[(i + 1) % len(vs)]))

    new_bumps = {}
    radii = []
    covered = 0.0
    for e in jump_edges:
        L = e.length
        line = LineString([e.segment.a, e.segment.b])
        if datum_zone is not None:
            reach = float(line.distance(datum_zone))
            if reach <= EPS_GEOM:
                raise BoundaryReachError("crack touches the boundary datum zone",
                                         segment=e.segment.to_json())
        rho = min(theta**3, theta * L / (5.0 * (1.0 + total_jump)))
        if datum_zone is not None:
            rho = min(rho, 0.9 * reach)
        margin = 1.2 * rho
        usable = L - 2 * margin
        if usable <= 2 * rho:
            centers_t = [0.5]
            spacing = L
        else:
            count = int(usable // (2 * rho))
            spacing = usable / count
            centers_t = [(margin + spacing * (k + 0.5)) / L for k in range(count)]
        others = [s for s in obstacle_segments
                  if not (np.allclose(s.a, e.segment.a) and np.allclose(s.b, e.segment.b))]
        centers = e.segment.a + np.asarray(centers_t)[:, None] * (e.segment.b - e.segment.a)
        reach_arr = np.full(len(centers), np.inf)
        for s in others:
            reach_arr = np.minimum(reach_arr, _point_segment_distance(centers, s.a, s.b))
        for c, reach_c in zip(centers, reach_arr):
            r_k = min(rho, 0.499 * spacing, 0.9 * reach_c)
            if r_k <= EPS_GEOM:
                continue
            new_bumps.setdefault(e.left_region, []).append(
                Bump(c, r_k, theta, e.normal))
            radii.append(r_k)
            covered += 2 * r_k
    if not radii:
        raise BoundaryReachError("no admissible bump placement on the crack")

    regions = []
    for r in u.regions:
        if r.id in new_bumps:
            if not r.map.is_affine:
                raise InvalidArgumentError(
                    "plus-side region map must be affine to carry bumps",
                    region=r.id, kind=r.map.kind)
            regions.append(Region(r.id, r.polygon, RegionMap.affine_plus_bumps(
                r.map.A, r.map.b, new_bumps[r.id])))
        else:
            regions.append(r)
    u_bar = build_field("displacement", u.outer, regions, inner=u.inner,
                        h=u.h, jump_tol=u.jump_tol, validate=False)
    tau_bar = 0.5 * (1 - theta) * min(radii)
    e_factor = _half_disc_strain_factor(theta)
    report = {
        "bumps": len(radii),
        "min_radius": min(radii),
        "max_radius": max(radii),
        "coverage": covered / total_jump,
        "coverage_target": 1.0 - theta / (1.0 + total_jump),
        "sup_diff": max(radii),
        "e_diff_l2": math.sqrt(sum(r**2 for r in radii) * e_factor),
        "jump_symdiff": 0.0,
        "profile_max_slope": bump_max_slope(theta),
        "tau_bar": tau_bar,
    }
    return u_bar, tau_bar, report


# ---------------------------------------------------------------------------
# recovery construction


def _field_sup_norms(u, order=6):
    """Sampled sup norms (|u|, |grad u|, |hess u|) over all regions."""
    from .quadrature import ear_clip

    s0 = s1 = s2 = 0.0
    for r in u.regions:
        tris = ear_clip(r.polygon.vertices)
        pts, _ = quad_points(tris, order)
        pts = np.vstack([pts.reshape(-1, 2), r.polygon.vertices])
        s0 = max(s0, float(np.linalg.norm(r.map(pts), axis=-1).max()))
        g = r.map.grad(pts)
        s1 = max(s1, float(np.sqrt(np.sum(g * g, axis=(-2, -1))).max()))
        hh = r.map.hess(pts)
        s2 = max(s2, float(np.sqrt(np.sum(hh * hh, axis=(-3, -2, -1))).max()))
    return s0, s1, s2


def _maximal_crack_segments(u):
    """Maximal straight crack segments (collinear jump edges merged)."""
    segs = [e.segment for e in u.edges if e.classification == DISPLACEMENT_JUMP]
    if not segs:
        return []
    merged = []
    for group in group_collinear(segs):
        d, n, c = canonical_line(segs[group[0]].a, segs[group[0]].b)
        ivs = []
        for i in group:
            t0, t1 = float(np.dot(segs[i].a, d)), float(np.dot(segs[i].b, d))
            ivs.append((min(t0, t1), max(t0, t1)))
        for lo, hi in merge_intervals(ivs):
            merged.append(Segment(lo * d + c * n, hi * d + c * n))
    return merged


def _select_level(u, tau, attempts=60):
    """Deterministic root-free level in (tau/2, tau), starting at 3 tau/4."""
    from .fields import normal_jump_pieces

    jump_edges = [e for e in u.edges
                  if e.classification == DISPLACEMENT_JUMP and e.right_region is not None]
    pieces = []
    for e in jump_edges:
        pieces.extend(normal_jump_pieces(u, e))
    level = 0.75 * tau
    for _ in range(attempts):
        if not _level_degenerate(pieces, level, tau):
            return level
        level = 0.5 * (level + 0.5 * tau)
    raise InvalidArgumentError("could not find a non-degenerate threshold level",
                               tau=tau)


def _level_degenerate(pieces, level, tau):
    for t0, t1, poly in pieces:
        p = poly - level
        coef = p.convert().coef
        if np.max(np.abs(coef)) <= 1e-13 * max(1.0, tau):
            return True  # identically at the level
        dp = p.deriv()
        for r in p.roots():
            if abs(r.imag) <= 1e-9 and t0 - 1e-12 <= r.real <= t1 + 1e-12:
                if abs(float(dp(float(r.real)))) <= 1e-10 * max(1.0, tau):
                    return True  # tangency at the level
    return False


def build_recovery(u, p, kappa=1.0, order=7):
    """Recovery deformation from a contact-compliant displacement.

    Thresholds the normal jump at a root-free level in (tau/2, tau), covers
    the resulting bad sub-segments by rectangles of height min(length,
    sqrt(eps)) split by the crack, replaces the displacement there by
    constants whose images stack pairwise-disjointly beyond the image of the
    rest, and returns y = id + eps w together with diagnostics.
    """
    if u.kind != "displacement":
        raise InvalidArgumentError("build_recovery expects a displacement field")
    for r in u.regions:
        if r.map.bumps or r.map.degree > 2:
            raise InvalidArgumentError(
                "recovery input must be regionwise polynomial of degree <= 2",
                region=r.id)
    eps = p.epsilon
    s0, s1, s2 = _field_sup_norms(u)
    norm_sum = s0 + s1 + s2
    norm_bound = eps ** ((p.beta - 1.0) / 2.0)
    if norm_sum > norm_bound:
        raise InvalidArgumentError(
            "sup-norm sum exceeds eps^((beta-1)/2)",
            norm_sum=norm_sum, bound=norm_bound, epsilon=eps)
    cracks = _maximal_crack_segments(u)
    min_sep = np.inf
    for i in range(len(cracks)):
        li = LineString([cracks[i].a, cracks[i].b])
        for j in range(i + 1, len(cracks)):
            lj = LineString([cracks[j].a, cracks[j].b])
            min_sep = min(min_sep, float(li.distance(lj)))
    if min_sep < 4.0 * math.sqrt(eps):
        raise InvalidArgumentError(
            "crack segments closer than 4 sqrt(eps)",
            separation=min_sep, required=4.0 * math.sqrt(eps))
    datum_zone = None
    if u.inner is not u.outer and u.inner.shapely().area < u.outer.shapely().area - EPS_GEOM:
        datum_zone = u.outer.shapely().difference(u.inner.shapely())
        for seg in cracks:
            dist = float(LineString([seg.a, seg.b]).distance(datum_zone))
            if dist < 4.0 * math.sqrt(eps):
                raise CoverError("crack segment within 4 sqrt(eps) of the datum zone",
                                 distance=dist)

    tau_eps = _select_level(u, p.tau)
    bad_segments, theta = bad_jump_set(u, tau_eps)

    outer_sh = u.outer.shapely()
    rect_polys = []
    perimeter_sum = 0.0
    for seg in bad_segments:
        L = seg.length
        hgt = min(L, math.sqrt(eps))
        n = perp(seg.direction) * (hgt / 2.0)
        quad = np.array([seg.a - n, seg.b - n, seg.b + n, seg.a + n])
        rect = shapely.Polygon(quad).intersection(outer_sh)
        if rect.is_empty or rect.area <= EPS_GEOM:
            raise CoverError("degenerate covering rectangle", segment=seg.to_json())
        rect_polys.append(rect)
        perimeter_sum += 2.0 * (L + hgt)
    for i in range(len(rect_polys)):
        for j in range(i + 1, len(rect_polys)):
            if rect_polys[i].intersection(rect_polys[j]).area > EPS_GEOM:
                raise CoverError("covering rectangles overlap", pair=(i, j))
        if datum_zone is not None and rect_polys[i].intersection(datum_zone).area > EPS_GEOM:
            raise CoverError("covering rectangle meets the datum zone", index=i)

    # carve the rectangles out of the original regions
    regions = []
    next_id = max(r.id for r in u.regions) + 1
    rect_union = shapely.union_all(rect_polys) if rect_polys else None
    for r in u.regions:
        if rect_union is None:
            regions.append(r)
            continue
        remainder = r.polygon.shapely().difference(rect_union)
        if remainder.area <= EPS_GEOM:
            continue
        ps = PolygonSet.from_shapely(remainder)
        if ps.holes:
            raise CoverError("rectangle subtraction created a hole", region=r.id)
        for poly in ps.outer:
            regions.append(Region(next_id, poly, r.map))
            next_id += 1

    # stack the rectangle images to the right of everything else
    margin = p.translation_margin if p.translation_margin is not None \
        else u.outer.diameter
    xmax = float(u.outer.vertices[:, 0].max()) + eps * s0
    cursor = xmax + margin
    rect_infos = []
    for rect in rect_polys:
        minx, miny, maxx, maxy = rect.bounds
        s_i = np.array([(cursor - minx) / eps, 0.0])
        rect_infos.append((rect, s_i))
        cursor += (maxx - minx) + margin
    for rect, s_i in rect_infos:
        for poly in PolygonSet.from_shapely(rect).outer:
            regions.append(Region(next_id, poly, RegionMap.constant(s_i)))
            next_id += 1

    w_regions = [Region(r.id, r.polygon, compose_with_identity(r.map, eps))
                 for r in regions]
    y_eps = build_field("deformation", u.outer, w_regions, inner=u.inner,
                        epsilon=eps, h=u.h, validate=False)

    energy = nonlinear_energy(y_eps, EnergyParams(eps, p.beta, kappa, order))
    cn = cn_check(y_eps)
    lin = linear_energy(u, kappa, order=order)
    diagnostics = {
        "tau_eps": tau_eps,
        "theta": theta,
        "rectangles": len(rect_polys),
        "perimeter_sum": perimeter_sum,
        "perimeter_bound_4theta": 4.0 * theta,
        "perimeter_bound_12theta": 12.0 * theta,
        "norm_sum": norm_sum,
        "norm_bound": norm_bound,
        "cn": cn,
        "energy": energy,
        "linear_energy": lin,
        "energy_upper": (lin.total + 12.0 * theta * kappa) if lin.total is not None else None,
    }
    return y_eps, diagnostics


# ---------------------------------------------------------------------------
# asymptotic representation report


def _poly_or_affine(coeffs):
    c = np.asarray(coeffs, float)
    if c.shape[1] <= 2 and c.shape[2] <= 2:
        A = np.zeros((2, 2))
        b = np.zeros(2)
        b[:] = c[:, 0, 0]
        if c.shape[1] > 1:
            A[:, 0] = c[:, 1, 0]
        if c.shape[2] > 1:
            A[:, 1] = c[:, 0, 1]
        if c.shape[1] > 1 and c.shape[2] > 1 and np.abs(c[:, 1, 1]).max() > 0:
            return RegionMap.polynomial(c)
        return RegionMap.affine(A, b)
    high = c.copy()
    high[:, :2, :2] = 0.0
    if np.abs(high).max() == 0.0:
        return _poly_or_affine(c[:, :2, :2])
    return RegionMap.polynomial(c)


def _difference_map(m1, m2):
    c1, c2 = m1.as_poly_coeffs(), m2.as_poly_coeffs()
    if c1 is None or c2 is None:
        return None
    mrows = max(c1.shape[1], c2.shape[1])
    ncols = max(c1.shape[2], c2.shape[2])
    d = np.zeros((2, mrows, ncols))
    d[:, :c1.shape[1], :c1.shape[2]] += c1
    d[:, :c2.shape[1], :c2.shape[2]] -= c2
    return _poly_or_affine(d)


def deviation_measure(u_eps, u, delta, depth=8):
    """[lo, hi] bounds on area{ |u_eps - u| > delta } via region overlay."""
    zero = np.zeros(2)
    lo = hi = 0.0
    for r1 in u_eps.regions:
        g1 = r1.polygon.shapely()
        for r2 in u.regions:
            piece = g1.intersection(r2.polygon.shapely())
            if piece.area <= EPS_GEOM:
                continue
            dm = _difference_map(r1.map, r2.map)
            if dm is None:
                hi += piece.area
                continue
            plo, phi = exceed_area([(dm, piece)], zero, delta, depth)
            lo += plo
            hi += phi
    return lo, hi


def asymptotic_report(sequence, u, gamma, C=10.0, deltas=(0.1, 0.01),
                      tol=1e-9, order=7):
    """Check the scaled-norm and jump-liminf conditions of an asymptotic
    representation with the trivial rotation partition.

    sequence: decreasing (epsilon, deformation field) pairs, at least 3.
    Ratios reported: |sym grad y - Id|_L2 / eps and |grad y - Id|_L2 / eps^gamma.
    """
    eps_list = [e for e, _ in sequence]
    if len(eps_list) < 3 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidArgumentError("need >= 3 strictly decreasing epsilons",
                                   eps=eps_list)
    if not 0.5 < gamma < 1.0:
        raise InvalidArgumentError("gamma must lie in (1/2, 1)", gamma=gamma)
    rows = []
    from .energy import field_integral

    for eps, y in sequence:
        ue = induced_displacement(y)
        sym_sq, _ = field_integral(ue, lambda m, x: np.sum(sym(m.grad(x))**2, axis=(-2, -1)), order)
        grad_sq, _ = field_integral(ue, lambda m, x: np.sum(m.grad(x)**2, axis=(-2, -1)), order)
        ratio_sym = math.sqrt(max(sym_sq, 0.0))          # |sym grad y - Id| / eps
        ratio_grad = math.sqrt(max(grad_sq, 0.0)) * eps ** (1.0 - gamma)
        devs = {}
        for delta in deltas:
            devs[delta] = deviation_measure(ue, u, delta)
        rows.append({
            "epsilon": eps,
            "ratio_sym": ratio_sym,
            "ratio_grad": ratio_grad,
            "jump_length": jump_length(y),
            "deviation": devs,
        })
    limit_jump = jump_length(u)
    min_jump = min(r["jump_length"] for r in rows)
    ratios_ok = all(r["ratio_sym"] <= C and r["ratio_grad"] <= C for r in rows)
    liminf_ok = limit_jump <= min_jump + tol
    last_dev = rows[-1]["deviation"]
    dev_ok = all(hi <= max(10 * tol, 10 * EPS_GEOM) or hi <= lo + 0.5
                 for lo, hi in last_dev.values())
    verdict = ratios_ok and liminf_ok
    return {
        "rows": rows,
        "limit_jump_length": limit_jump,
        "liminf_ok": liminf_ok,
        "ratios_ok": ratios_ok,
        "deviations_small": dev_ok,
        "C": C,
        "gamma": gamma,
        "verdict": verdict,
        "strict_jump_drop": limit_jump < min_jump - tol,
    }


# ---------------------------------------------------------------------------
# sweep harness


def _worker_count(n):
    env = os.environ.get("GRIFFITH_THREADS")
    if env:
        return max(1, min(int(env), n))
    return max(1, min(4, n))


def sweep(generator, eps_list, kappa=1.0, beta=0.8, order=7, cc_tol=0.0):
    """Run a deformation generator over a decreasing epsilon list.

    Each row evaluates the nonlinear energy, the CN gap and the contact
    minimum of the induced displacement; rows are assembled in input order.
    """
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidArgumentError("eps list must be strictly decreasing",
                                   eps=eps_list)

    def one(eps):
        out = generator(eps)
        y = out[0] if isinstance(out, tuple) else out
        rep = nonlinear_energy(y, EnergyParams(eps, beta, kappa, order))
        cn = cn_check(y)
        ue = induced_displacement(y)
        cc = cc_check(ue, cc_tol=cc_tol)
        notes = []
        if not rep.admissible:
            notes.append("inadmissible")
        if not cn.passed:
            notes.append("cn-fail")
        if rep.quadrature_warning:
            notes.append("quadrature-warning")
        return SweepRow(
            epsilon=eps,
            jump_length=jump_length(y),
            bulk=rep.bulk,
            second_gradient=rep.second_gradient,
            surface=rep.surface,
            total=rep.total,
            cn_gap=cn.gap,
            cc_min=cc.min_normal_jump,
            notes=";".join(notes),
        )

    with ThreadPoolExecutor(max_workers=_worker_count(len(eps_list))) as pool:
        return list(pool.map(one, eps_list))


def detect_eps0(eps_list, pass_flags):
    """Largest epsilon from which on every smaller epsilon passed."""
    eps0 = None
    for eps, ok in zip(eps_list, pass_flags):
        if ok:
            if eps0 is None:
                eps0 = eps
        else:
            eps0 = None
    return eps0
