"""Independent sampling oracles.

These deliberately avoid the GEOS-backed kernel and the arrangement logic in
:mod:`griffith2d.geom2d` so the two routes stay independent: areas by
deterministic grid sampling with even-odd ray casting, slice counts by naive
per-segment intersection, projection measures by sampled lines.
"""
from __future__ import annotations

import numpy as np


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def point_in_ring(points, ring):
    """Even-odd rule membership of many points in one vertex ring."""
    pts = np.asarray(points, float)
    v = np.asarray(ring, float)
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    n = len(v)
    for i in range(n):
        x0, y0 = v[i]
        x1, y1 = v[(i + 1) % n]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xs = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < np.where(crosses, xs, np.inf))
    return inside


def grid_membership(polyset_json, bounds, n=400):
    """Boolean mask over an n x n grid of cell centers inside the region."""
    (x0, y0), (x1, y1) = bounds
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    mask = np.zeros(len(pts), dtype=bool)
    for ring in polyset_json["outer"]:
        mask |= point_in_ring(pts, ring)
    for ring in polyset_json.get("holes", []):
        mask &= ~point_in_ring(pts, ring)
    return mask, (x1 - x0) * (y1 - y0) / (n * n)


def grid_area(polyset_json, bounds, n=400):
    """Deterministic n x n cell-center sampling estimate of the region area."""
    mask, cell = grid_membership(polyset_json, bounds, n)
    return float(mask.sum() * cell)


def grid_area_binary(polyset_a, polyset_b, kind, bounds, n=400):
    """Grid estimate of the area of a boolean combination of two regions."""
    ma, cell = grid_membership(polyset_a, bounds, n)
    mb, _ = grid_membership(polyset_b, bounds, n)
    if kind == "union":
        m = ma | mb
    elif kind == "intersection":
        m = ma & mb
    elif kind == "difference":
        m = ma & ~mb
    else:
        raise ValueError(f"unknown boolean op {kind!r}")
    return float(m.sum() * cell)


def brute_slice_count(segments, xi, w):
    """Naive transversal count: solve each segment-line intersection directly.

    Valid in generic position only (no endpoint or parallel coincidences).
    """
    xi = np.asarray(xi, float)
    w = np.asarray(w, float)
    count = 0
    for a, b in segments:
        a = np.asarray(a, float)
        d = np.asarray(b, float) - a
        denom = float(_cross(d, xi))
        if denom == 0.0:
            continue
        s = float(_cross(w - a, xi)) / denom
        if 0.0 < s < 1.0:
            count += 1
    return count


def sampled_projection_measure(gamma, lam, mu, n_lines=10_000):
    """Estimate of the single-crossing offset measure by n uniform lines.

    Offsets are placed at midpoints of equal subintervals of the projected
    hull so arrangement breakpoints contribute at most one misclassified
    cell each.
    """
    mu = np.asarray(mu, float)
    nu = np.array([-mu[1], mu[0]])
    endpoints = []
    for a, b in list(gamma) + list(lam):
        endpoints.append(float(np.dot(a, nu)))
        endpoints.append(float(np.dot(b, nu)))
    lo, hi = min(endpoints), max(endpoints)
    if hi - lo <= 0:
        return 0.0
    offs = lo + (np.arange(n_lines) + 0.5) * (hi - lo) / n_lines
    hits = 0
    ga = [(np.asarray(a, float), np.asarray(b, float)) for a, b in gamma]
    la = [(np.asarray(a, float), np.asarray(b, float)) for a, b in lam]
    for o in offs:
        w = o * nu
        if brute_slice_count(ga, mu, w) == 1 and brute_slice_count(la, mu, w) == 1:
            hits += 1
    return hits * (hi - lo) / n_lines


def fd_gradient(func, x, step=1e-5):
    """Central finite-difference Jacobian of an R^2 -> R^2 map."""
    x = np.asarray(x, float)
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = step
        cols.append((np.asarray(func(x + e)) - np.asarray(func(x - e))) / (2 * step))
    return np.column_stack(cols)


def fd_hessian(func, x, step=1e-5, grad=None):
    """Central finite-difference Hessian (component, d1, d2) of an R^2 -> R^2 map.

    With ``grad`` given, the Hessian is the first central difference of the
    gradient (two-stage oracle); plain value-based second differences carry an
    eps/step^2 roundoff floor of about 1e-6 at the default step.
    """
    x = np.asarray(x, float)
    h = np.zeros((2, 2, 2))
    if grad is not None:
        for j in range(2):
            ej = np.zeros(2)
            ej[j] = step
            h[:, :, j] = (np.asarray(grad(x + ej)) - np.asarray(grad(x - ej))) / (2 * step)
        return 0.5 * (h + np.swapaxes(h, 1, 2))
    f0 = np.asarray(func(x))
    for i in range(2):
        for j in range(2):
            ei, ej = np.zeros(2), np.zeros(2)
            ei[i] = step
            ej[j] = step
            if i == j:
                val = (np.asarray(func(x + ei)) - 2 * f0 + np.asarray(func(x - ei))) / step**2
            else:
                val = (np.asarray(func(x + ei + ej)) - np.asarray(func(x + ei - ej))
                       - np.asarray(func(x - ei + ej)) + np.asarray(func(x - ei - ej))) / (4 * step**2)
            h[:, i, j] = val
    return h
