"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one `[criterion k] PASS/FAIL` line (visible with -s or in
captured output) and asserts the same condition.
"""
import time

import numpy as np
import pytest

from _gen import folding_field, random_injective_field, rotation
from griffith2d.constructions import (
    RecoveryParams,
    build_recovery,
    detect_eps0,
    example_basic,
    example_staircase,
    opening_twin,
    opening_twin_energy,
    strengthen_contact,
)
from griffith2d.energy import (
    EnergyParams,
    density_W,
    det_expansion_check,
    dist_SO2,
    linear_energy,
    nonlinear_energy,
    quadratic_Q,
    quadratic_form_from_density,
    sym,
)
from griffith2d.fields import RegionMap, build_field, jump_length
from griffith2d.geom2d import Polygon, PolygonSet, Segment, boolean_op, projection_measure_V
from griffith2d.noninterp import (
    blowup_hypotheses,
    cc_check,
    cn_check,
    dpm_conclusion_check,
    integrate_det_over,
    measure_image,
)
from griffith2d.oracle import grid_membership, sampled_projection_measure
from griffith2d.solver import (
    assemble_stiffness,
    energy_of_solution,
    mesh_cracked_domain,
    solve_contact,
    solve_contact_bruteforce,
)

OUTER = Polygon.rectangle(-1, -1, 1, 1)


def _report(k, ok, detail=""):
    print(f"[criterion {k}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {k} failed: {detail}"


def test_criterion_1_example_basic():
    t0 = time.perf_counter()
    ok = True
    details = []
    for eps in (0.1, 0.05, 0.02, 0.01):
        y, u = example_basic(eps)
        jl = jump_length(y)
        rep = nonlinear_energy(y, EnergyParams(eps, 0.8, 1.0))
        cn = cn_check(y)
        cc = cc_check(u)
        ok &= abs(jl - 4.0) <= 1e-12
        ok &= abs(rep.bulk) <= 1e-12 and abs(rep.second_gradient) <= 1e-12
        ok &= cn.gap <= 1e-9 and cn.passed
        ok &= abs(cc.min_normal_jump + 1.0) <= 1e-12
        ok &= abs(cc.violation_length - 2.0) <= 1e-9
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    _report(1, ok, f"runtime {elapsed:.3f}s")


def test_criterion_2_example_staircase():
    t0 = time.perf_counter()
    ok = True
    for mu, limit in (((-1.0, -1.0), 5.0), ((-2.0, -1.0), 7.0)):
        m1, m2 = abs(mu[0]), abs(mu[1])
        for eps in (0.1, 0.05, 0.02, 0.01):
            y, lim = example_staircase(eps, mu)
            ok &= abs(lim - limit) <= 1e-12
            jl = jump_length(y)
            upper = 3 + 2 * m1 / m2 + eps * m2
            lower = 3 - 4 * eps * m2 + 2 * m1 / m2 - 4 * eps * m1
            ok &= lower <= jl <= upper
            ok &= abs(jl - limit) <= 4 * eps * (m1 + m2)
            ok &= cn_check(y).passed
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 2.0
    _report(2, ok, f"runtime {elapsed:.3f}s")


def test_criterion_3_density_suite():
    rng = np.random.default_rng(2024)
    ok = True
    # frame indifference over 10^3 (R, F)
    F = rng.normal(size=(1000, 2, 2))
    R = np.array([rotation(a) for a in rng.uniform(0, 2 * np.pi, 1000)])
    w = density_W(F)
    ok &= bool(np.all(np.abs(density_W(R @ F) - w) <= 1e-12 * (1 + w)))
    # coercivity with c = 1 exact
    ok &= bool(np.all(density_W(F) >= dist_SO2(F) ** 2 - 1e-15))
    # finite-difference Hessian vs Q over 10^3 random F, relative to the
    # quadratic scale 2|F|^2 (the sharp bound Q(F) <= 2 |F|_F^2)
    Qfd = quadratic_form_from_density(density_W)
    q_exact = quadratic_Q(F)
    q_fd = np.array([Qfd(f) for f in F])
    scale = 2.0 * np.sum(F * F, axis=(1, 2))
    ok &= bool(np.all(np.abs(q_fd - q_exact) <= 1e-6 * scale))
    # Taylor residual constant stable across |H| in {1e-2, 1e-3}
    consts = []
    for scale in (1e-2, 1e-3):
        H = rng.normal(size=(1000, 2, 2))
        H *= scale / np.linalg.norm(H, axis=(1, 2))[:, None, None]
        res = np.abs(density_W(np.eye(2) + H) - np.sum(sym(H) ** 2, axis=(1, 2)))
        consts.append(float(res.max()) / scale**3)
    ok &= consts[0] <= 10 and consts[1] <= 10
    ok &= 0.25 <= consts[0] / consts[1] <= 4.0
    _report(3, ok, f"taylor constants {consts[0]:.3f}, {consts[1]:.3f}")


def test_criterion_4_det_expansion():
    rng = np.random.default_rng(7)
    F = rng.normal(size=(10_000, 2, 2)) * rng.uniform(0.1, 3.0, (10_000, 1, 1))
    res, bound = det_expansion_check(F)
    ok = bool(np.all(res <= bound + 1e-15))
    for t in (0.3, 1.0, 2.5):
        r, b = det_expansion_check(np.diag([t, t]))
        ok &= abs(r - b) <= 1e-14 * max(1.0, b)
    _report(4, ok, "10^4 samples, diagonal equality")


def test_criterion_5_geometry_oracles():
    from _gen import star_polygon

    rng = np.random.default_rng(55)
    ok = True
    worst = 0.0
    bounds = ((-2.5, -2.5), (2.5, 2.5))
    cell = 5.0 / 400.0
    for _ in range(50):
        # instance distribution keeps boolean-result features above two cells
        a = PolygonSet([star_polygon(rng, center=rng.uniform(-0.2, 0.2, 2),
                                     rmin=0.5, rmax=1.3, nv=int(rng.integers(5, 12)))])
        b = PolygonSet([star_polygon(rng, center=rng.uniform(-0.2, 0.2, 2),
                                     rmin=0.5, rmax=1.3, nv=int(rng.integers(5, 12)))])
        ma, cellarea = grid_membership(a.to_json(), bounds, 400)
        mb, _ = grid_membership(b.to_json(), bounds, 400)
        for kind, mask in (("union", ma | mb), ("intersection", ma & mb)):
            res = boolean_op(a, b, kind)
            exact = res.area
            sh = res.shapely()
            thickness = 2.0 * sh.area / max(sh.length, 1e-12)
            if exact <= 0.05 or thickness < 2 * cell:
                continue  # features below two grid cells: outside the contract
            approx = float(mask.sum() * cellarea)
            rel = abs(exact - approx) / exact
            worst = max(worst, rel)
            ok &= rel <= 0.01
    for _ in range(20):
        y = random_injective_field(rng)
        rep = cn_check(y)
        ok &= abs(rep.gap) <= 1e-6 * y.outer.area
    for _ in range(20):
        ok &= not cn_check(folding_field(rng)).passed
    _report(5, ok, f"worst grid deviation {worst:.4f}")


def test_criterion_6_recovery_pipeline():
    ok = True
    kappa, beta = 1.0, 0.8
    # opening twin with closed-form energy; tau = 0.5 gives an empty bad set
    alpha = 0.02
    u = opening_twin(alpha=alpha)
    E_u = opening_twin_energy(alpha, kappa)
    eps_list = [0.1, 0.05, 0.02, 0.01, 5e-3, 2e-3, 1e-3]
    cn_flags, diffs, sgs = [], [], []
    for eps in eps_list:
        p = RecoveryParams(tau=0.5, epsilon=eps, beta=beta, gamma=0.75)
        y, diag = build_recovery(u, p, kappa=kappa)
        ok &= diag["theta"] == 0.0
        cn_flags.append(diag["cn"].passed)
        diffs.append(abs(diag["energy"].total - E_u))
        sgs.append(diag["energy"].second_gradient)
    eps0 = detect_eps0(eps_list, cn_flags)
    ok &= eps0 is not None
    ok &= all(flag for eps, flag in zip(eps_list, cn_flags) if eps <= eps0)
    ok &= diffs[-1] <= 0.05
    ok &= all(b <= a + 1e-15 for a, b in zip(diffs, diffs[1:]))
    slope = float(np.polyfit(np.log(eps_list), np.log(sgs), 1)[0])
    ok &= slope >= 2 - 2 * beta - 0.1

    # Example 3.1 limit: the whole crack is bad (theta = 2)
    _, ul = example_basic(0.1)
    p = RecoveryParams(tau=0.5, epsilon=1e-3, beta=beta, gamma=0.75)
    y, diag = build_recovery(ul, p, kappa=kappa)
    ok &= abs(diag["theta"] - 2.0) <= 1e-12
    ok &= diag["perimeter_sum"] <= 8.0 + 1e-12
    ok &= diag["perimeter_sum"] <= 12 * diag["theta"]
    ok &= diag["cn"].passed
    E_lim = linear_energy(ul, kappa).total
    ok &= diag["energy"].total <= E_lim + 12 * diag["theta"] * kappa + 0.05
    _report(6, ok, f"eps0={eps0}, |dE|={diffs[-1]:.2e}, sg slope={slope:.3f}")


def test_criterion_7_strengthener():
    u = opening_twin()
    base_len = jump_length(u)
    ok = True
    bad = []
    for theta in (0.2, 0.1, 0.05):
        ub, tau_bar, report = strengthen_contact(u, theta)
        ok &= report["sup_diff"] <= theta**3
        ok &= abs(jump_length(ub) - base_len) <= 1e-12
        cc = cc_check(ub, thresholds=[2 * tau_bar])
        bad.append(cc.marginal_length[2 * tau_bar])
    ok &= all(b <= a + 1e-12 for a, b in zip(bad, bad[1:]))
    _report(7, ok, f"bad lengths {bad}")


def test_criterion_8_solver():
    square = Polygon.rectangle(0, 0, 1, 1)
    mesh = mesh_cracked_domain(square, [Segment((0.5, 0.2), (0.5, 0.8))], 0.25)
    ok = len(mesh.crack_pairs) <= 8
    h_stretch = RegionMap.affine([[1, 0], [0, 0]], [0, 0])
    u, rep = solve_contact(mesh, h_stretch)
    K = assemble_stiffness(mesh)
    n = len(mesh.nodes)
    g = np.zeros(2 * n)
    fixed = np.zeros(2 * n, dtype=bool)
    for i in mesh.dirichlet:
        val = h_stretch(mesh.nodes[i])
        g[2 * i], g[2 * i + 1] = val
        fixed[2 * i] = fixed[2 * i + 1] = True
    free = ~fixed
    x = np.linalg.solve(K[np.ix_(free, free)], -K[np.ix_(free, fixed)] @ g[fixed])
    full = np.empty(2 * n)
    full[fixed] = g[fixed]
    full[free] = x
    ok &= float(np.abs(u.ravel() - full).max()) <= 1e-8

    h_comp = RegionMap.affine([[-1, 0], [0, 0]], [0, 0])
    uc, repc = solve_contact(mesh, h_comp)
    ok &= repc.min_normal_jump >= -1e-10
    load = float(np.linalg.norm(K[np.ix_(free, fixed)] @ g[fixed])) + 1.0
    ok &= repc.stationarity <= 1e-8 * load
    ok &= repc.complementarity <= 1e-10
    ub, active_b = solve_contact_bruteforce(mesh, h_comp)
    ok &= repc.active_set == active_b
    eb = energy_of_solution(mesh, ub, 0.0).bulk
    ok &= abs(repc.energy - eb) <= 1e-10
    _report(8, ok, f"pairs={len(mesh.crack_pairs)}, active={repc.active_set}")


def test_criterion_9_blowup():
    wp, wm = np.array([0.5, 0.0]), np.array([-0.5, 0.0])
    eta, rho = 1e-4, 1.0
    two_phase = build_field("displacement", OUTER, [
        (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.constant(wm)),
        (1, Polygon.rectangle(0, -1, 1, 1), RegionMap.constant(wp)),
    ])
    rep = blowup_hypotheses(two_phase, (0, 0), rho, (1, 0), wp, wm, eta)
    ok = rep.flags == (True, True, True)
    ok &= rep.jump_in_window == pytest.approx(rho, abs=1e-12)
    ok &= rep.deviation_area_plus == 0.0 and rep.deviation_area_minus == 0.0
    ok &= rep.strain_energy == 0.0

    # (a)-violator: one extra jump edge of length 2 rho eta inside the window
    L = 2 * rho * eta
    x_cut = 0.5 - L
    c = np.zeros((2, 2, 2))
    c[0, 0, 0] = wp[0] - eta * x_cut
    c[1, 0, 0] = wp[1]
    c[0, 1, 0] = eta
    va = build_field("displacement", OUTER, [
        (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.constant(wm)),
        (1, Polygon([(0, -1), (1, -1), (1, 0.2), (x_cut, 0.2), (x_cut, 1), (0, 1)]),
         RegionMap.constant(wp)),
        (2, Polygon([(x_cut, 0.2), (1, 0.2), (1, 1), (x_cut, 1)]),
         RegionMap.polynomial(c)),
    ])
    fa = blowup_hypotheses(va, (0, 0), rho, (1, 0), wp, wm, eta).flags
    ok &= fa == (False, True, True)

    # (b)-violator: constant offset 2 eta on a sliver of area 4 rho^2 eta^4
    a = 2 * rho * eta**2
    vb = build_field("displacement", OUTER, [
        (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.constant(wm)),
        (1, Polygon([(0, -1), (1, -1), (1, 1), (0, 1), (0, 0.1 + a),
                     (a, 0.1 + a), (a, 0.1), (0, 0.1)]), RegionMap.constant(wp)),
        (2, Polygon.rectangle(0.0, 0.1, a, 0.1 + a),
         RegionMap.constant(wp + [2 * eta, 0.0])),
    ])
    fb = blowup_hypotheses(vb, (0, 0), rho, (1, 0), wp, wm, eta).flags
    ok &= fb == (True, False, True)

    # (c)-violator: uniform strain diag(s, 0) with s^2 rho^2 = 2 rho eta^2
    s = np.sqrt(2 * eta**2 / rho)
    A = np.array([[s, 0], [0, 0]])
    vc = build_field("displacement", OUTER, [
        (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.affine(A, wm)),
        (1, Polygon.rectangle(0, -1, 1, 1), RegionMap.affine(A, wp)),
    ])
    fc = blowup_hypotheses(vc, (0, 0), rho, (1, 0), wp, wm, eta).flags
    ok &= fc == (True, True, False)

    # structural conclusions
    Dp = PolygonSet.from_polygon(Polygon.rectangle(0, -0.5, 0.5, 0.5))
    Dm = PolygonSet.from_polygon(Polygon.rectangle(-0.5, -0.5, 0, 0.5))
    res = dpm_conclusion_check(two_phase, (0, 0), rho, (1, 0), Dp, Dm, wp, wm, eta)
    ok &= res["ok"] and res["crossing_curves"] == {"plus": True, "minus": True}
    ang = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    disc = PolygonSet.from_polygon(
        Polygon(np.column_stack([0.25 + 0.2 * np.cos(ang), 0.2 * np.sin(ang)])))
    res2 = dpm_conclusion_check(two_phase, (0, 0), rho, (1, 0), disc, Dm, wp, wm, eta)
    ok &= res2["crossing_curves"]["plus"] is False
    _report(9, ok, f"flags a={fa} b={fb} c={fc}")


def test_criterion_10_projection_measure():
    ok = True
    worst = 0.0
    cases = []
    for k in range(20):
        x0 = 0.1 * k - 1.0
        y0, y1 = -1.0 + 0.05 * k, 1.0 - 0.02 * k
        gamma = [Segment((x0, y0), (x0 + 0.1, y1))]
        lam = list(gamma)
        if k % 2 == 0:
            lam = lam + [Segment((x0 + 0.7, y0 - 0.4), (x0 + 0.75, 0.5 * (y0 + y1)))]
        ang = 0.05 * (k - 10)
        mu = np.array([np.cos(ang), np.sin(ang)])
        cases.append((gamma, lam, mu))
    for gamma, lam, mu in cases:
        exact = projection_measure_V(gamma, lam, mu)
        raw_g = [(s.a, s.b) for s in gamma]
        raw_l = [(s.a, s.b) for s in lam]
        approx = sampled_projection_measure(raw_g, raw_l, mu, n_lines=10_000)
        nu = np.array([-mu[1], mu[0]])
        offs = [float(p @ nu) for s in lam for p in (s.a, s.b)]
        width = max(offs) - min(offs)
        err = abs(exact - approx)
        worst = max(worst, err / width)
        ok &= err <= 1e-3 * width
    _report(10, ok, f"worst relative deviation {worst:.2e}")
