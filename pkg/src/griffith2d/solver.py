"""P1 finite elements on cracked meshes with nodewise contact constraints.

The mesh duplicates nodes along constrained crack edges (one copy per side,
crack tips stay single) and the solver minimizes the assembled quadratic
energy subject to (u+ - u-) . nu >= 0 at every crack pair via a primal
active-set iteration.  The crack is fixed; the surface energy enters only
reporting.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay
from shapely.geometry import LineString, Point
from shapely.geometry import Polygon as _ShPolygon

from .energy import quadratic_Q
from .errors import InvalidArgumentError, MeshError, SolverError
from .geom2d import cross2, EPS_GEOM, Polygon, Segment, perp


@dataclass
class CrackedMesh:
    nodes: np.ndarray          # (n, 2), crack-adjacent nodes duplicated
    triangles: np.ndarray      # (m, 3) CCW
    crack_pairs: list          # (plus_node, minus_node, nu)
    crack_edges: list          # ((plus_i, plus_j), length) along each crack
    dirichlet: np.ndarray      # node indices carrying the boundary datum
    h_max: float

    @property
    def crack_length(self):
        return sum(length for _, length in self.crack_edges)

    def to_json(self):
        return {
            "nodes": self.nodes.tolist(),
            "triangles": self.triangles.tolist(),
            "crack_pairs": [[int(p), int(m), nu.tolist()] for p, m, nu in self.crack_pairs],
            "dirichlet": [int(i) for i in self.dirichlet],
            "h_max": self.h_max,
        }


@dataclass(frozen=True)
class SolveReport:
    dofs: int
    energy: float
    min_normal_jump: float
    stationarity: float
    complementarity: float
    iterations: int
    active_set: tuple

    def to_json(self):
        return {"dofs": self.dofs, "energy": self.energy,
                "min_normal_jump": self.min_normal_jump,
                "stationarity": self.stationarity,
                "complementarity": self.complementarity,
                "iterations": self.iterations,
                "active_set": list(self.active_set)}


def _subdivide(a, b, max_len):
    n = max(1, int(np.ceil(np.linalg.norm(b - a) / max_len)))
    ts = np.linspace(0.0, 1.0, n + 1)
    return a + ts[:, None] * (b - a)


def mesh_cracked_domain(omega, crack, h_max):
    """Conforming Delaunay-style triangulation with duplicated crack nodes.

    Constrained edges (domain boundary and crack segments) are protected by
    keeping other points outside their diametral discs, which forces them to
    appear in the Delaunay triangulation; their presence is verified.
    """
    if not isinstance(omega, Polygon):
        omega = Polygon(omega)
    crack = [s if isinstance(s, Segment) else Segment(*s) for s in crack]
    if h_max <= 0:
        raise InvalidArgumentError("h_max must be positive", h_max=h_max)
    osh = _ShPolygon(omega.vertices)
    for s in crack:
        if not (osh.covers(Point(*s.a)) and osh.covers(Point(*s.b))):
            raise MeshError("crack endpoint outside the domain", segment=s.to_json())
    for i in range(len(crack)):
        for j in range(i + 1, len(crack)):
            if LineString([crack[i].a, crack[i].b]).distance(
                    LineString([crack[j].a, crack[j].b])) <= EPS_GEOM:
                raise MeshError("crack segments intersect", pair=(i, j))

    s = h_max / 2.0
    boundary_pts = []
    vs = omega.vertices
    for i in range(len(vs)):
        seg = _subdivide(vs[i], vs[(i + 1) % len(vs)], s)
        boundary_pts.extend(seg[:-1])
    boundary_pts = np.array(boundary_pts)

    crack_chains = []
    crack_pts = []
    for seg in crack:
        chain = _subdivide(seg.a, seg.b, s)
        crack_chains.append((len(crack_pts), len(chain), seg))
        crack_pts.extend(chain)
    crack_pts = np.array(crack_pts) if crack_pts else np.zeros((0, 2))

    lo = vs.min(axis=0)
    hi = vs.max(axis=0)
    gx = np.arange(lo[0] + s, hi[0] - s / 2, s)
    gy = np.arange(lo[1] + s, hi[1] - s / 2, s)
    if len(gx) and len(gy):
        grid = np.stack(np.meshgrid(gx, gy), axis=-1).reshape(-1, 2)
    else:
        grid = np.zeros((0, 2))
    # protect constrained edges: drop grid points inside diametral discs
    keep = np.ones(len(grid), dtype=bool)
    protect = 0.52 * s
    for i in range(len(vs)):
        a, b = vs[i], vs[(i + 1) % len(vs)]
        keep &= _dist_to_segment(grid, a, b) > protect
    for seg in crack:
        keep &= _dist_to_segment(grid, seg.a, seg.b) > protect
    grid = grid[keep]
    if len(grid):
        inside = np.array([osh.covers(Point(*p)) for p in grid])
        grid = grid[inside]

    pts = np.vstack([boundary_pts, crack_pts, grid]) if len(crack_pts) else \
        np.vstack([boundary_pts, grid])
    pts, index_map = _dedupe_points(pts)
    tri = Delaunay(pts)
    simplices = tri.simplices.copy()
    # drop triangles outside a nonconvex domain
    centroids = pts[simplices].mean(axis=1)
    inside = np.array([osh.covers(Point(*c)) for c in centroids])
    areas = 0.5 * cross2(pts[simplices[:, 1]] - pts[simplices[:, 0]],
                           pts[simplices[:, 2]] - pts[simplices[:, 0]])
    simplices = simplices[inside & (np.abs(areas) > (EPS_GEOM * s) ** 2)]

    edge_set = set()
    for t in simplices:
        for k in range(3):
            e = (min(t[k], t[(k + 1) % 3]), max(t[k], t[(k + 1) % 3]))
            edge_set.add(e)

    def node_of(p_index):
        return index_map[p_index]

    n_bd = len(boundary_pts)
    for start, count, seg in crack_chains:
        for k in range(count - 1):
            i = node_of(n_bd + start + k)
            j = node_of(n_bd + start + k + 1)
            if (min(i, j), max(i, j)) not in edge_set:
                raise MeshError("constrained crack edge missing from triangulation",
                                edge=(int(i), int(j)))
    diam = np.max(np.stack([
        np.linalg.norm(pts[simplices[:, 1]] - pts[simplices[:, 0]], axis=1),
        np.linalg.norm(pts[simplices[:, 2]] - pts[simplices[:, 1]], axis=1),
        np.linalg.norm(pts[simplices[:, 0]] - pts[simplices[:, 2]], axis=1),
    ]), axis=0)
    if len(diam) and diam.max() > h_max + EPS_GEOM:
        raise MeshError("triangle diameter exceeds h_max",
                        max_diameter=float(diam.max()), h_max=h_max)

    nodes = pts.copy()
    triangles = _orient_ccw(nodes, simplices)
    crack_pairs = []
    crack_edges = []
    boundary_ring = LineString(np.vstack([vs, vs[:1]]))
    for start, count, seg in crack_chains:
        nu = perp(seg.direction)
        chain_nodes = [node_of(n_bd + start + k) for k in range(count)]
        dup = {}
        for pos, ni in enumerate(chain_nodes):
            is_end = pos in (0, count - 1)
            on_bd = boundary_ring.distance(Point(*nodes[ni])) <= 10 * EPS_GEOM
            if is_end and not on_bd:
                continue  # crack tip stays single
            dup[ni] = len(nodes)
            nodes = np.vstack([nodes, nodes[ni]])
        # plus-side triangles reference the duplicates
        for t_idx, t in enumerate(triangles):
            if not any(v in dup for v in t):
                continue
            centroid = nodes[t].mean(axis=0)
            side = float(np.dot(centroid - seg.a, nu))
            if side > 0:
                triangles[t_idx] = [dup.get(v, v) for v in t]
        for ni, nplus in dup.items():
            crack_pairs.append((nplus, ni, nu.copy()))
        plus_chain = [dup.get(ni, ni) for ni in chain_nodes]
        for k in range(count - 1):
            length = float(np.linalg.norm(nodes[plus_chain[k + 1]] - nodes[plus_chain[k]]))
            crack_edges.append(((plus_chain[k], plus_chain[k + 1]), length))

    dirichlet = [i for i in range(len(nodes))
                 if boundary_ring.distance(Point(*nodes[i])) <= 10 * EPS_GEOM]
    return CrackedMesh(nodes=np.asarray(nodes), triangles=np.asarray(triangles),
                       crack_pairs=crack_pairs, crack_edges=crack_edges,
                       dirichlet=np.array(dirichlet, dtype=int), h_max=h_max)


def _dist_to_segment(points, a, b):
    d = b - a
    L2 = float(d @ d)
    t = np.clip((points - a) @ d / L2, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.linalg.norm(points - proj, axis=1)


def _dedupe_points(pts, tol=1e-9):
    out = []
    index_map = []
    seen = {}
    for p in pts:
        key = (round(p[0] / tol), round(p[1] / tol))
        hit = None
        for dk in ((0, 0), (0, 1), (1, 0), (0, -1), (-1, 0),
                   (1, 1), (1, -1), (-1, 1), (-1, -1)):
            j = seen.get((key[0] + dk[0], key[1] + dk[1]))
            if j is not None and np.linalg.norm(p - out[j]) <= tol:
                hit = j
                break
        if hit is None:
            out.append(p)
            seen[key] = len(out) - 1
            index_map.append(len(out) - 1)
        else:
            index_map.append(hit)
    return np.array(out), index_map


def _orient_ccw(nodes, simplices):
    tris = simplices.copy()
    a = nodes[tris[:, 0]]
    b = nodes[tris[:, 1]]
    c = nodes[tris[:, 2]]
    flip = cross2(b - a, c - a) < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


# ---------------------------------------------------------------------------
# assembly and QP


def q_matrix(Q=quadratic_Q):
    """3x3 bilinear matrix of Q on symmetric strains (e11, e22, e12)."""
    basis = [np.array([[1.0, 0.0], [0.0, 0.0]]),
             np.array([[0.0, 0.0], [0.0, 1.0]]),
             np.array([[0.0, 1.0], [1.0, 0.0]])]
    D = np.empty((3, 3))
    qv = [float(Q(M)) for M in basis]
    for i in range(3):
        for j in range(3):
            if i == j:
                D[i, j] = qv[i]
            else:
                D[i, j] = 0.5 * (float(Q(basis[i] + basis[j])) - qv[i] - qv[j])
    eig = np.linalg.eigvalsh(D)
    if eig.min() <= 0:
        raise InvalidArgumentError("Q must be positive definite on symmetric matrices",
                                   eigenvalues=eig.tolist())
    return D


def assemble_stiffness(mesh, Q=quadratic_Q):
    """Dense stiffness K with energy(u) = 0.5 u^T K u = int Q(e(u))/2."""
    D = q_matrix(Q)
    n = len(mesh.nodes)
    K = np.zeros((2 * n, 2 * n))
    for t in mesh.triangles:
        xy = mesh.nodes[t]
        mat = np.column_stack([np.ones(3), xy])
        area = 0.5 * abs(np.linalg.det(mat))
        grads = np.linalg.solve(mat, np.eye(3)[:, :])[1:, :]  # (2, 3): d lambda_k / dx_i
        B = np.zeros((3, 6))
        for k in range(3):
            gx, gy = grads[0, k], grads[1, k]
            B[0, 2 * k] = gx
            B[1, 2 * k + 1] = gy
            B[2, 2 * k] = 0.5 * gy
            B[2, 2 * k + 1] = 0.5 * gx
        Ke = area * B.T @ D @ B
        dofs = np.array([[2 * v, 2 * v + 1] for v in t]).ravel()
        K[np.ix_(dofs, dofs)] += Ke
    return K


def _pair_rows(mesh, n_dofs):
    rows = []
    for p, m, nu in mesh.crack_pairs:
        row = np.zeros(n_dofs)
        row[2 * p] += nu[0]
        row[2 * p + 1] += nu[1]
        row[2 * m] -= nu[0]
        row[2 * m + 1] -= nu[1]
        rows.append(row)
    return np.array(rows) if rows else np.zeros((0, n_dofs))


def solve_contact(mesh, h, Q=quadratic_Q, feas_tol=1e-10, iter_cap=None):
    """Minimize the assembled quadratic energy under nodewise crack-pair
    non-penetration, Dirichlet datum h on the boundary node set.

    Primal active set starting from the fully closed (all pairs glued)
    feasible point; a direct symmetric solve per iteration.
    """
    if len(mesh.dirichlet) == 0:
        raise InvalidArgumentError("Dirichlet node set is empty")
    n = len(mesh.nodes)
    K = assemble_stiffness(mesh, Q)
    A_full = _pair_rows(mesh, 2 * n)
    g = np.zeros(2 * n)
    fixed = np.zeros(2 * n, dtype=bool)
    for i in mesh.dirichlet:
        val = h(mesh.nodes[i])
        g[2 * i], g[2 * i + 1] = val[0], val[1]
        fixed[2 * i] = fixed[2 * i + 1] = True
    free = ~fixed
    H = K[np.ix_(free, free)]
    c = K[np.ix_(free, fixed)] @ g[fixed]
    A = A_full[:, free]
    b = -A_full[:, fixed] @ g[fixed] if len(A_full) else np.zeros(0)
    m = len(A)
    keep = [k for k in range(m) if np.linalg.norm(A[k]) > 0]
    skipped = [k for k in range(m) if k not in keep]
    for k in skipped:
        if abs(b[k]) > feas_tol:
            raise SolverError("crack pair fully fixed with incompatible datum", pair=k)
    A = A[keep]
    b = b[keep]
    m = len(A)
    cap = iter_cap if iter_cap is not None else 10 * m + 50

    x, lam, active, iters = _active_set_qp(H, c, A, b, cap, feas_tol)

    u = np.empty(2 * n)
    u[fixed] = g[fixed]
    u[free] = x
    grad = H @ x + c
    if active:
        grad = grad - A[sorted(active)].T @ lam
    stationarity = float(np.linalg.norm(grad))
    gap = A @ x - b if m else np.zeros(0)
    lam_full = np.zeros(m)
    for idx, k in enumerate(sorted(active)):
        lam_full[k] = lam[idx] if len(lam) else 0.0
    complementarity = float(np.max(np.abs(lam_full * gap))) if m else 0.0
    energy = 0.5 * float(u @ K @ u)
    min_jump = float(gap.min()) if m else 0.0
    report = SolveReport(
        dofs=2 * n,
        energy=energy,
        min_normal_jump=min_jump,
        stationarity=stationarity,
        complementarity=complementarity,
        iterations=iters,
        active_set=tuple(keep[k] for k in sorted(active)),
    )
    return u.reshape(n, 2), report


def _kkt_solve(H, c, A_w):
    nw = len(A_w)
    n = len(H)
    M = np.zeros((n + nw, n + nw))
    M[:n, :n] = H
    if nw:
        M[:n, n:] = -A_w.T
        M[n:, :n] = A_w
    rhs = np.concatenate([-c, np.zeros(nw)])
    sol = np.linalg.solve(M, rhs)
    return sol[:n], sol[n:]


def _active_set_qp(H, c, A, b, cap, feas_tol):
    """Textbook primal active-set for min 0.5 x'Hx + c'x s.t. Ax >= b.

    Starts from the fully-active (all constraints as equalities) feasible
    point; deterministic lowest-index tie breaking.
    """
    m = len(A)
    if m == 0:
        return np.linalg.solve(H, -c), np.zeros(0), set(), 1
    active = set(range(m))
    x, lam = _kkt_solve(H, c, A[sorted(active)] if active else np.zeros((0, len(H))))
    iters = 1
    while iters < cap:
        iters += 1
        rows = sorted(active)
        x_star, lam = _kkt_solve(H, c, A[rows] if rows else np.zeros((0, len(H))))
        step = x_star - x
        if np.linalg.norm(step) <= 1e-14 * (1 + np.linalg.norm(x)):
            # stationary on the working set: check multipliers
            if len(lam) == 0 or lam.min() >= -feas_tol:
                return x_star, lam, active, iters
            drop = rows[int(np.argmin(lam))]
            active.remove(drop)
            continue
        # step toward x_star, blocked by inactive constraints
        alpha = 1.0
        blocker = None
        for k in range(m):
            if k in active:
                continue
            denom = float(A[k] @ step)
            if denom < -1e-14:
                ratio = float((b[k] - A[k] @ x) / denom)
                if ratio < alpha - 1e-14:
                    alpha = max(ratio, 0.0)
                    blocker = k
        x = x + alpha * step
        if blocker is not None:
            active.add(blocker)
        else:
            x = x_star
            if len(lam) == 0 or lam.min() >= -feas_tol:
                return x, lam, active, iters
            drop = rows[int(np.argmin(lam))]
            active.remove(drop)
    raise SolverError("active-set iteration cap exceeded", iterations=iters,
                      cap=cap)


def solve_contact_bruteforce(mesh, h, Q=quadratic_Q, feas_tol=1e-10):
    """Exhaustive enumeration over all active sets (oracles for <= ~12 pairs)."""
    n = len(mesh.nodes)
    K = assemble_stiffness(mesh, Q)
    A_full = _pair_rows(mesh, 2 * n)
    g = np.zeros(2 * n)
    fixed = np.zeros(2 * n, dtype=bool)
    for i in mesh.dirichlet:
        val = h(mesh.nodes[i])
        g[2 * i], g[2 * i + 1] = val[0], val[1]
        fixed[2 * i] = fixed[2 * i + 1] = True
    free = ~fixed
    H = K[np.ix_(free, free)]
    c = K[np.ix_(free, fixed)] @ g[fixed]
    A = A_full[:, free]
    b = -A_full[:, fixed] @ g[fixed] if len(A_full) else np.zeros(0)
    keep = [k for k in range(len(A)) if np.linalg.norm(A[k]) > 0]
    A, b = A[keep], b[keep]
    m = len(A)
    best = None
    for mask in range(2 ** m):
        W = [k for k in range(m) if mask >> k & 1]
        try:
            x, lam = _kkt_solve(H, c, A[W] if W else np.zeros((0, len(H))))
        except np.linalg.LinAlgError:
            continue
        gap = A @ x - b if m else np.zeros(0)
        if m and gap.min() < -1e-8:
            continue
        if len(lam) and lam.min() < -1e-8:
            continue
        energy = 0.5 * float(x @ H @ x) + float(c @ x)
        if best is None or energy < best[0] - 1e-14:
            u = np.empty(2 * n)
            u[fixed] = g[fixed]
            u[free] = x
            best = (energy, u.reshape(n, 2), tuple(keep[k] for k in W))
    if best is None:
        raise SolverError("no KKT point found by enumeration")
    return best[1], best[2]


def energy_of_solution(mesh, u_h, kappa, Q=quadratic_Q):
    """Discrete quadratic energy plus kappa times the (fixed) crack length."""
    from .energy import EnergyReport

    K = assemble_stiffness(mesh, Q)
    u = np.asarray(u_h, float).ravel()
    bulk = 0.5 * float(u @ K @ u)
    return EnergyReport(bulk=bulk, second_gradient=0.0,
                        surface=kappa * mesh.crack_length, admissible=True)
