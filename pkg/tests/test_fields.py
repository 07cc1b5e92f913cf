import json

import numpy as np
import pytest

from griffith2d.constructions import example_basic, example_staircase, opening_twin
from griffith2d.errors import (
    AmbiguousPointError,
    CoverageError,
    DatumError,
    InvalidArgumentError,
    PartitionError,
)
from griffith2d.fields import (
    Bump,
    RegionMap,
    build_field,
    crack_edges,
    field_from_json,
    field_to_json,
    gradient,
    hessian,
    induced_displacement,
    jump_length,
    normal_jump_pieces,
    trace_jump,
)
from griffith2d.geom2d import Polygon
from griffith2d.oracle import fd_gradient, fd_hessian

OUTER = Polygon.rectangle(-1, -1, 1, 1)


def _hat_field():
    t1 = Polygon([(-1, -1), (1, -1), (-1, 1)])
    t2 = Polygon([(1, -1), (1, 1), (-1, 1)])
    return build_field("displacement", OUTER, [
        (0, t1, RegionMap.affine([[0, 0], [1, 1]], [2, 0])),
        (1, t2, RegionMap.constant([2, 0])),
    ])


def test_identity_field_no_cracks():
    f = build_field("deformation", OUTER, [(0, OUTER, RegionMap.identity())],
                    epsilon=0.1)
    assert f.edges == ()
    assert jump_length(f) == 0.0


def test_example_basic_two_crack_edges():
    y, _ = example_basic(0.1)
    jumps = [e for e in y.edges if e.classification == "displacement_jump"]
    assert len(jumps) == 2
    assert all(abs(e.length - 2.0) < 1e-12 for e in jumps)
    assert jump_length(y) == pytest.approx(4.0, abs=1e-12)


def test_overlapping_regions_rejected():
    with pytest.raises(PartitionError):
        build_field("displacement", OUTER, [
            (0, Polygon.rectangle(-1, -1, 0.05, 1), RegionMap.constant([0, 0])),
            (1, Polygon.rectangle(-0.05, -1, 1, 1), RegionMap.constant([1, 0])),
        ])


def test_coverage_gap_rejected():
    with pytest.raises(CoverageError):
        build_field("displacement", OUTER, [
            (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.constant([0, 0])),
            (1, Polygon.rectangle(0.2, -1, 1, 1), RegionMap.constant([1, 0])),
        ])


def test_datum_validation():
    inner = Polygon.rectangle(-0.5, -0.5, 0.5, 0.5)
    h = RegionMap.constant([0.25, 0.0])
    good = build_field("displacement", OUTER,
                       [(0, OUTER, RegionMap.constant([0.25, 0.0]))],
                       inner=inner, h=h)
    assert good.h is h
    with pytest.raises(DatumError):
        build_field("displacement", OUTER,
                    [(0, OUTER, RegionMap.constant([0.9, 0.0]))],
                    inner=inner, h=h)


def test_hat_gradient_only_jump():
    f = _hat_field()
    kinds = [e.classification for e in f.edges]
    assert kinds == ["gradient_only_jump"]


def test_trace_jump_limit():
    _, u = example_basic(0.1)
    e = [e for e in u.edges if e.classification == "displacement_jump"][0]
    for t in (0.0, 0.3, 1.0):
        j, nu = trace_jump(u, e, t)
        assert float(j @ nu) == pytest.approx(-1.0, abs=1e-12)


def test_trace_jump_opening_twin_sign():
    u = opening_twin()
    e = u.edges[0]
    j, nu = trace_jump(u, e, 0.5)
    assert float(j @ nu) == pytest.approx(1.0, abs=1e-12)


def test_trace_jump_errors():
    f = _hat_field()
    with pytest.raises(InvalidArgumentError):
        trace_jump(f, f.edges[0], 0.5)  # gradient-only edge
    u = opening_twin()
    with pytest.raises(InvalidArgumentError):
        trace_jump(u, u.edges[0], 1.5)


def test_gradient_hessian_basic():
    y, _ = example_basic(0.1)
    assert np.allclose(gradient(y, (-0.5, 0.3)), np.eye(2))
    assert np.abs(hessian(y, (-0.5, 0.3))).max() == 0.0
    with pytest.raises(AmbiguousPointError):
        gradient(y, (0.0, 0.3))  # on a crack edge


def test_bump_plateau_gradient_equals_affine():
    A = np.array([[0.1, 0.0], [0.0, 0.2]])
    m = RegionMap.affine_plus_bumps(A, [0, 0],
                                    [Bump((0.3, 0.2), 0.4, 0.3, (0.0, 1.0))])
    g = m.grad(np.array([0.3, 0.2]))
    assert np.abs(g - A).max() < 1e-12
    gf = fd_gradient(m, np.array([0.3, 0.2]))
    assert np.abs(gf - A).max() < 1e-7


def test_analytic_derivatives_match_fd():
    rng = np.random.default_rng(9)
    coeffs = np.zeros((2, 3, 3))
    coeffs[0, 2, 0], coeffs[0, 1, 1], coeffs[1, 0, 2] = 0.3, -0.2, 0.5
    coeffs[0, 1, 0], coeffs[1, 0, 1] = 1.0, 1.0
    bump = Bump((0.0, 0.0), 0.5, 0.25, (1.0, 0.5))
    maps = [
        RegionMap.polynomial(coeffs),
        RegionMap.affine_plus_bumps([[0.1, 0], [0, 0.2]], [0.3, -0.1], [bump]),
    ]
    for m in maps:
        count = 0
        while count < 100:
            x = rng.uniform(-0.9, 0.9, 2)
            if m.bumps:
                # the profile is C^2 only: keep the FD stencil away from the
                # plateau/ring breakpoints where third derivatives jump
                rhat = np.linalg.norm(x - bump.center) / bump.radius
                if min(abs(rhat - (1 - bump.theta)), abs(rhat - 1.0)) < 1e-3:
                    continue
            count += 1
            g, gf = m.grad(x), fd_gradient(m, x)
            h, hf = m.hess(x), fd_hessian(m, x, grad=m.grad)
            gs = 1.0 + np.abs(g).max()
            hs = 1.0 + np.abs(h).max()
            assert np.abs(g - gf).max() / gs < 1e-6
            assert np.abs(h - hf).max() / hs < 1e-6


def test_jump_length_staircase_within_paper_window():
    y, _ = example_staircase(0.1, (-1.0, -1.0))
    assert 4.2 <= jump_length(y) <= 5.1


def test_json_roundtrip_bit_identical():
    y, _ = example_staircase(0.1, (-1.0, -1.0))
    blob = json.dumps(field_to_json(y))
    y2 = field_from_json(json.loads(blob))
    assert len(y2.regions) == len(y.regions)
    for a, b in zip(y.regions, y2.regions):
        assert np.array_equal(a.polygon.vertices, b.polygon.vertices)
        assert a.map.to_json() == b.map.to_json()
    # bump map roundtrip
    m = RegionMap.affine_plus_bumps([[1, 0], [0, 1]], [0.5, 0],
                                    [Bump((0.1, 0.2), 0.3, 0.4, (0, 1))])
    assert RegionMap.from_json(json.loads(json.dumps(m.to_json()))).to_json() == m.to_json()
    poly = RegionMap.polynomial(np.arange(18, dtype=float).reshape(2, 3, 3))
    assert RegionMap.from_json(json.loads(json.dumps(poly.to_json()))).to_json() == poly.to_json()


def test_classification_independent_of_region_order():
    def build(order):
        regs = [
            (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.constant([0, 0])),
            (1, Polygon.rectangle(0, -1, 1, 1), RegionMap.constant([1, 0])),
        ]
        return build_field("displacement", OUTER, [regs[i] for i in order])

    a, b = build([0, 1]), build([1, 0])
    assert [e.classification for e in a.edges] == [e.classification for e in b.edges]
    assert jump_length(a) == jump_length(b)
    ja, na = trace_jump(a, a.edges[0], 0.5)
    jb, nb = trace_jump(b, b.edges[0], 0.5)
    assert float(ja @ na) == pytest.approx(float(jb @ nb), abs=1e-14)


def test_induced_displacement_same_topology():
    y, _ = example_staircase(0.05, (-2.0, -1.0))
    u = induced_displacement(y)
    assert len(u.edges) == len(y.edges)
    assert jump_length(u) == pytest.approx(jump_length(y), abs=1e-12)
    assert [e.classification for e in u.edges] == [e.classification for e in y.edges]


def test_normal_jump_sign_invariance():
    # (swap sides, flip nu) leaves [u].nu invariant: the twin and its
    # constant-shifted mirror carry the same opening value
    u = opening_twin()
    j, nu = trace_jump(u, u.edges[0], 0.25)
    assert float(j @ nu) == pytest.approx(float((-j) @ (-nu)), abs=1e-15)
    mirror = build_field("displacement", OUTER, [
        (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.constant([-1, 0])),
        (1, Polygon.rectangle(0, -1, 1, 1), RegionMap.constant([0, 0])),
    ])
    jm, num = trace_jump(mirror, mirror.edges[0], 0.25)
    assert float(jm @ num) == pytest.approx(float(j @ nu), abs=1e-15)


def test_crack_edges_reclassification_tolerance():
    _, u = example_basic(0.1)
    assert [e.classification for e in crack_edges(u)] == ["displacement_jump"]
    # a tolerance above the jump magnitude reclassifies the edge
    coarse = crack_edges(u, jump_tol=10.0)
    assert [e.classification for e in coarse] == ["no_jump"]


def test_normal_jump_pieces_linear():
    # jump.nu = x2 along the vertical crack: one linear piece with root at t=0.5
    u = build_field("displacement", OUTER, [
        (0, Polygon.rectangle(-1, -1, 0, 1), RegionMap.constant([0, 0])),
        (1, Polygon.rectangle(0, -1, 1, 1), RegionMap.affine([[0, 1], [0, 0]], [0, 0])),
    ])
    pieces = normal_jump_pieces(u, u.edges[0])
    assert len(pieces) == 1
    t0, t1, poly = pieces[0]
    assert (t0, t1) == (0.0, 1.0)
    assert float(poly(0.5)) == pytest.approx(0.0, abs=1e-12)
    assert float(poly(1.0)) == pytest.approx(1.0, abs=1e-12)
