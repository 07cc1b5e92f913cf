import numpy as np
import pytest

from griffith2d.errors import MeshError
from griffith2d.fields import RegionMap
from griffith2d.geom2d import Polygon, Segment
from griffith2d.solver import (
    assemble_stiffness,
    energy_of_solution,
    mesh_cracked_domain,
    q_matrix,
    solve_contact,
    solve_contact_bruteforce,
)

SQUARE = Polygon.rectangle(0, 0, 1, 1)
CRACK = [Segment((0.5, 0.2), (0.5, 0.8))]

H_RIGID = RegionMap.affine([[0, -0.3], [0.3, 0]], [0.1, 0.2])
H_STRETCH = RegionMap.affine([[1, 0], [0, 0]], [0, 0])
H_COMPRESS = RegionMap.affine([[-1, 0], [0, 0]], [0, 0])


@pytest.fixture(scope="module")
def cracked_mesh():
    return mesh_cracked_domain(SQUARE, CRACK, 0.25)


def test_mesh_no_crack():
    mesh = mesh_cracked_domain(SQUARE, [], 0.5)
    assert len(mesh.crack_pairs) == 0
    assert len(mesh.triangles) > 0
    assert len(mesh.dirichlet) > 0


def test_mesh_crack_pairs(cracked_mesh):
    assert len(cracked_mesh.crack_pairs) >= 2
    assert cracked_mesh.crack_length == pytest.approx(0.6, abs=1e-12)
    for p, m, nu in cracked_mesh.crack_pairs:
        assert np.allclose(cracked_mesh.nodes[p], cracked_mesh.nodes[m])
        assert abs(np.linalg.norm(nu) - 1) < 1e-12


def test_mesh_diameters(cracked_mesh):
    n = cracked_mesh.nodes
    for t in cracked_mesh.triangles:
        for k in range(3):
            assert np.linalg.norm(n[t[k]] - n[t[(k + 1) % 3]]) <= 0.25 + 1e-9


def test_mesh_crack_outside_rejected():
    with pytest.raises(MeshError):
        mesh_cracked_domain(SQUARE, [Segment((0.5, 0.5), (1.5, 0.5))], 0.25)


def test_q_matrix_default():
    D = q_matrix()
    assert np.allclose(D, np.diag([2.0, 2.0, 4.0]))


def test_stiffness_kernel_rigid_motions():
    mesh = mesh_cracked_domain(SQUARE, [], 0.5)
    K = assemble_stiffness(mesh)
    w = np.linalg.eigvalsh(K)
    assert np.sum(w < 1e-10) == 3  # translations + infinitesimal rotation
    assert w[3] > 1e-8


def test_rigid_motion_exact(cracked_mesh):
    u, rep = solve_contact(cracked_mesh, H_RIGID)
    exact = cracked_mesh.nodes @ np.array([[0, -0.3], [0.3, 0]]).T + [0.1, 0.2]
    assert np.abs(u - exact).max() < 1e-10
    assert rep.energy < 1e-12


def test_p1_affine_exactness_uncracked():
    mesh = mesh_cracked_domain(SQUARE, [], 0.3)
    h = RegionMap.affine([[0.7, 0.2], [-0.1, 0.4]], [0.05, -0.3])
    u, rep = solve_contact(mesh, h)
    exact = h(mesh.nodes)
    assert np.abs(u - exact).max() < 1e-10


def test_stretch_matches_unconstrained(cracked_mesh):
    u, rep = solve_contact(cracked_mesh, H_STRETCH)
    assert rep.active_set == ()
    assert rep.min_normal_jump > 0
    # direct unconstrained solve oracle
    K = assemble_stiffness(cracked_mesh)
    n = len(cracked_mesh.nodes)
    g = np.zeros(2 * n)
    fixed = np.zeros(2 * n, dtype=bool)
    for i in cracked_mesh.dirichlet:
        val = H_STRETCH(cracked_mesh.nodes[i])
        g[2 * i], g[2 * i + 1] = val
        fixed[2 * i] = fixed[2 * i + 1] = True
    free = ~fixed
    x = np.linalg.solve(K[np.ix_(free, free)], -K[np.ix_(free, fixed)] @ g[fixed])
    full = np.empty(2 * n)
    full[fixed] = g[fixed]
    full[free] = x
    assert np.abs(u.ravel() - full).max() < 1e-8


def test_compression_active_set(cracked_mesh):
    u, rep = solve_contact(cracked_mesh, H_COMPRESS)
    assert rep.min_normal_jump >= -1e-10
    assert rep.stationarity <= 1e-8 * (1 + np.abs(u).max())
    assert rep.complementarity <= 1e-10
    assert len(rep.active_set) == len(cracked_mesh.crack_pairs)
    # strictly above the unconstrained energy
    us, rep_s = solve_contact(cracked_mesh, H_STRETCH)
    K = assemble_stiffness(cracked_mesh)
    n = len(cracked_mesh.nodes)
    g = np.zeros(2 * n)
    fixed = np.zeros(2 * n, dtype=bool)
    for i in cracked_mesh.dirichlet:
        val = H_COMPRESS(cracked_mesh.nodes[i])
        g[2 * i], g[2 * i + 1] = val
        fixed[2 * i] = fixed[2 * i + 1] = True
    free = ~fixed
    x = np.linalg.solve(K[np.ix_(free, free)], -K[np.ix_(free, fixed)] @ g[fixed])
    full = np.empty(2 * n)
    full[fixed] = g[fixed]
    full[free] = x
    unconstrained = 0.5 * float(full @ K @ full)
    assert rep.energy > unconstrained + 1e-6


def test_compression_matches_bruteforce(cracked_mesh):
    assert len(cracked_mesh.crack_pairs) <= 8
    u, rep = solve_contact(cracked_mesh, H_COMPRESS)
    ub, active_b = solve_contact_bruteforce(cracked_mesh, H_COMPRESS)
    assert rep.active_set == active_b
    eb = energy_of_solution(cracked_mesh, ub, 0.0).bulk
    assert abs(rep.energy - eb) < 1e-10
    assert np.abs(u - ub).max() < 1e-8


def test_bruteforce_agreement_random_datum():
    mesh = mesh_cracked_domain(SQUARE, CRACK, 0.25)
    rng = np.random.default_rng(12)
    for _ in range(5):
        A = rng.uniform(-1, 1, (2, 2))
        b = rng.uniform(-0.5, 0.5, 2)
        h = RegionMap.affine(A, b)
        u, rep = solve_contact(mesh, h)
        ub, active_b = solve_contact_bruteforce(mesh, h)
        assert rep.active_set == active_b
        eb = energy_of_solution(mesh, ub, 0.0).bulk
        assert abs(rep.energy - eb) < 1e-10
        assert rep.min_normal_jump >= -1e-10


def test_energy_of_solution(cracked_mesh):
    zero = np.zeros_like(cracked_mesh.nodes)
    rep = energy_of_solution(cracked_mesh, zero, kappa=2.0)
    assert rep.bulk == 0.0
    assert rep.surface == pytest.approx(2.0 * 0.6, abs=1e-12)
    u, srep = solve_contact(cracked_mesh, H_STRETCH)
    e = energy_of_solution(cracked_mesh, u, kappa=3.0)
    assert e.bulk == pytest.approx(srep.energy, abs=1e-12)
    assert e.total == pytest.approx(srep.energy + 3.0 * 0.6, abs=1e-12)
