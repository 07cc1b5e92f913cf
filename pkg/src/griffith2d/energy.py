"""Stored energy density, its quadratic form at identity, and evaluation of
the rescaled nonlinear energy and the linearized energy on region fields.

The default density is the squared distance to SO(2): continuous, frame
indifferent, vanishing exactly on SO(2), and coercive with constant 1.  Its
quadratic form at identity is Q(F) = 2 |sym F|^2.  Densities are pluggable;
they must be vectorized over leading array axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
from shapely.geometry import Polygon as _ShPolygon

from .errors import InvalidArgumentError
from .fields import RegionMap, jump_length
from .geom2d import cross2, EPS_GEOM
from .quadrature import (
    ear_clip,
    quad_points,
    refine_triangles,
    triangulate_shapely,
)


@dataclass(frozen=True)
class EnergyParams:
    epsilon: float
    beta: float
    kappa: float
    order: int = 7

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidArgumentError("epsilon must be positive", epsilon=self.epsilon)
        if not 2.0 / 3.0 < self.beta < 1.0:
            raise InvalidArgumentError("beta must lie strictly in (2/3, 1)", beta=self.beta)
        if not self.kappa > 0:
            raise InvalidArgumentError("kappa must be positive", kappa=self.kappa)
        if self.order < 3:
            raise InvalidArgumentError("quadrature order must be >= 3", order=self.order)


@dataclass(frozen=True)
class EnergyReport:
    bulk: float
    second_gradient: float
    surface: float
    admissible: bool
    quadrature_warning: bool = False

    @property
    def total_finite(self):
        return self.admissible

    @property
    def total(self):
        if not self.admissible:
            return None
        return self.bulk + self.second_gradient + self.surface

    def to_json(self):
        return {
            "bulk": self.bulk,
            "second_gradient": self.second_gradient,
            "surface": self.surface,
            "admissible": self.admissible,
            "total_finite": self.total_finite,
            "total": self.total,
            "quadrature_warning": self.quadrature_warning,
        }


# ---------------------------------------------------------------------------
# density and quadratic form


def dist_SO2(F):
    """Distance to SO(2) via the closed-form signed 2x2 singular values."""
    F = np.asarray(F, float)
    a, b = F[..., 0, 0], F[..., 0, 1]
    c, d = F[..., 1, 0], F[..., 1, 1]
    P = np.hypot(a + d, b - c)          # sigma1 + sign(det) sigma2
    M = np.hypot(a - d, b + c)          # sigma1 - sign(det) sigma2
    s1 = 0.5 * (P + M)
    s2 = 0.5 * (P - M)
    return np.sqrt(np.maximum((s1 - 1.0) ** 2 + (s2 - 1.0) ** 2, 0.0))


def density_W(F):
    """Default stored energy: squared distance to SO(2)."""
    return dist_SO2(F) ** 2


def sym(F):
    return 0.5 * (F + np.swapaxes(F, -1, -2))


def quadratic_Q(F):
    """Q(F) = 2 |sym F|^2, the Hessian form of the default density at Id."""
    s = sym(np.asarray(F, float))
    return 2.0 * np.sum(s * s, axis=(-2, -1))


def quadratic_form_from_density(W, step=1e-4):
    """Central-difference Hessian form of a density at identity."""
    eye = np.eye(2)

    def Q(F):
        F = np.asarray(F, float)
        return (W(eye + step * F) + W(eye - step * F) - 2.0 * W(eye)) / step**2

    return Q


def det_expansion_check(F):
    """(residual, bound) of the planar determinant expansion at identity.

    residual = |det(Id+F) - 1 - tr F| (= |det F| in 2D), bound = |F|_F^2 / 2.
    """
    F = np.asarray(F, float)
    det = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
    residual = np.abs(det)
    bound = 0.5 * np.sum(F * F, axis=(-2, -1))
    return residual, bound


# ---------------------------------------------------------------------------
# region integration (affine shortcut, bump-aware splitting)


def _disc_ring(center, radius, n=64):
    ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return center + radius * np.column_stack([np.cos(ang), np.sin(ang)])


def region_pieces(region, refine_factor=0.25):
    """Decompose a region for integration.

    Yields (tris, signs, map, affine_exact): for affine maps a single token
    piece with affine_exact=True (gradient-only integrands are constant); for
    bump maps the bump discs are split off and refined to a triangle diameter
    of refine_factor * radius, the remaining base being exactly affine.
    """
    m = region.map
    if m.is_affine:
        yield None, None, m, True
        return
    if m.kind == "polynomial":
        yield ear_clip(region.polygon.vertices), None, m, False
        return
    # affine_plus_bumps: outside every bump disc the map is exactly affine
    poly = region.polygon.shapely()
    discs = [_ShPolygon(_disc_ring(bp.center, bp.radius)) for bp in m.bumps]
    base = poly.difference(shapely.union_all(discs))
    base_map = RegionMap.affine(m.A, m.b)
    if base.area > EPS_GEOM:
        tris, signs = triangulate_shapely(base)
        yield tris, signs, base_map, True
    for bp, disc in zip(m.bumps, discs):
        piece = poly.intersection(disc)
        if piece.area <= EPS_GEOM * bp.radius**2:
            continue
        tris, signs = triangulate_shapely(piece)
        keep = signs > 0
        tris = refine_triangles(tris[keep], refine_factor * bp.radius)
        yield tris, None, m, False


def field_integral(f, integrand, order, gradient_only=True):
    """Integrate integrand(map, points) over all regions of a field.

    gradient_only integrands are constant on affine pieces and are evaluated
    once per piece.  Returns (value, quadrature_warning): the warning flags a
    relative disagreement above 1e-6 between orders ``order`` and ``order+2``
    on non-affine pieces.
    """
    total = 0.0
    check = 0.0
    has_inexact = False
    for region in f.regions:
        for tris, signs, m, affine_exact in region_pieces(region):
            if affine_exact and gradient_only:
                if tris is None:
                    area = region.polygon.area
                else:
                    areas = 0.5 * cross2(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
                    if signs is not None:
                        areas = areas * signs
                    area = float(areas.sum())
                centroid = np.mean(region.polygon.vertices, axis=0)
                total += float(integrand(m, centroid[None, :])[0]) * area
                continue
            if tris is None:
                tris = ear_clip(region.polygon.vertices)
            has_inexact = True
            for o, acc in ((order, "total"), (order + 2, "check")):
                pts, wts = quad_points(tris, o)
                vals = np.asarray(integrand(m, pts.reshape(-1, 2))).reshape(pts.shape[:2])
                if signs is not None:
                    wts = wts * np.asarray(signs)[:, None]
                contrib = float(np.sum(vals * wts))
                if acc == "total":
                    total += contrib
                else:
                    check += contrib
    warning = False
    if has_inexact:
        warning = abs(total - check) > 1e-6 * (abs(total) + abs(check) + 1e-30)
    return total, warning


def nonlinear_energy(y, p, W=density_W):
    """Rescaled nonlinear energy report of a deformation field.

    bulk = eps^-2 int W(grad y); second_gradient = eps^-2beta int |hess y|^2;
    surface = kappa * jump length; the total is infinite (flagged) when a
    gradient-only jump edge violates admissibility.
    """
    if y.kind != "deformation":
        raise InvalidArgumentError("nonlinear_energy expects a deformation field")
    admissible = not any(e.classification == "gradient_only_jump" for e in y.edges)
    bulk_int, warn1 = field_integral(y, lambda m, x: W(m.grad(x)), p.order)
    sg_int, warn2 = field_integral(
        y, lambda m, x: np.sum(m.hess(x) ** 2, axis=(-3, -2, -1)), p.order)
    surface = p.kappa * jump_length(y)
    return EnergyReport(
        bulk=bulk_int / p.epsilon**2,
        second_gradient=sg_int / p.epsilon ** (2 * p.beta),
        surface=surface,
        admissible=admissible,
        quadrature_warning=warn1 or warn2,
    )


def linear_energy(u, kappa, Q=quadratic_Q, order=7):
    """Linearized energy report: int Q(e(u))/2 + kappa * jump length."""
    if u.kind != "displacement":
        raise InvalidArgumentError("linear_energy expects a displacement field")
    bulk, warn = field_integral(u, lambda m, x: 0.5 * Q(sym(m.grad(x))), order)
    return EnergyReport(
        bulk=bulk,
        second_gradient=0.0,
        surface=kappa * jump_length(u),
        admissible=True,
        quadrature_warning=warn,
    )


def integrate_det_gradient(y, order=7):
    """(integral of det grad y, minimum det at evaluation points)."""
    total = 0.0
    min_det = np.inf
    for region in y.regions:
        for tris, signs, m, affine_exact in region_pieces(region):
            if affine_exact:
                det = float(np.linalg.det(m.A))
                if tris is None:
                    area = region.polygon.area
                else:
                    areas = 0.5 * cross2(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
                    if signs is not None:
                        areas = areas * signs
                    area = float(areas.sum())
                total += det * area
                min_det = min(min_det, det)
                continue
            if tris is None:
                tris = ear_clip(region.polygon.vertices)
            pts, wts = quad_points(tris, order)
            g = m.grad(pts.reshape(-1, 2))
            det = np.linalg.det(g).reshape(pts.shape[:2])
            if signs is not None:
                wts = wts * np.asarray(signs)[:, None]
            total += float(np.sum(det * wts))
            min_det = min(min_det, float(det.min()))
    return total, min_det
