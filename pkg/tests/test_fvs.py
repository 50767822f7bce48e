import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branched_splines.base_splines import TorusGrid
from branched_splines.cover import BranchedCoverSpec
from branched_splines.fvs import (
    UNIT_SQUARE, FvsDofs, GeometryError, bb_basis, build_fvs_surface, de_casteljau, element_dofs,
    fvs_eval, fvs_solve_element, fvs_surface, locate, patch_eval, scan_fvs_surface,
)
from branched_splines.geometry import EmbeddingConfig, mesh_report, torus_embed
from oracles import random_convex_quad, random_cubic

seeds = st.integers(0, 2**32 - 1)


def interior_points(P, rng, count):
    """Random convex combinations of the corners (strictly inside)."""
    w = rng.dirichlet(np.ones(4), size=count)
    return w @ P


def test_constant_element():
    elem = fvs_solve_element(UNIT_SQUARE, FvsDofs(np.ones(4), np.zeros((4, 2)), np.zeros(4)))
    assert np.allclose(elem.coefs, 1.0, atol=1e-13)


def test_linear_element():
    f = lambda x, y: x
    grad = lambda x, y: (1.0, 0.0)
    P = np.array([[0.0, 0.0], [2.0, 0.2], [1.8, 1.5], [0.1, 1.0]])
    dofs = FvsDofs.from_function(P, f, grad)
    assert dofs.normals[1] == pytest.approx(1.3 / np.hypot(0.2, 1.3))
    assert dofs.normals[3] == pytest.approx(-1 / np.hypot(0.1, 1.0))
    elem = fvs_solve_element(P, dofs)
    for p in [(1.0, 0.7), (0.3, 0.4), (1.7, 1.2)]:
        value, gradient = fvs_eval(elem, p)
        assert value == pytest.approx(p[0], abs=1e-12)
        assert np.allclose(gradient, (1, 0), atol=1e-10)


def test_bernstein_basis_is_partition_of_unity():
    lam = np.array([0.2, 0.3, 0.5])
    assert bb_basis(lam).sum() == pytest.approx(1.0)
    coefs = np.arange(10.0)
    value, _ = de_casteljau(coefs, lam)
    assert value == pytest.approx(bb_basis(lam) @ coefs)


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_patch_test_cubics(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_quad(rng)
    f, grad = random_cubic(rng)
    elem = fvs_solve_element(P, FvsDofs.from_function(P, f, grad))
    for p in interior_points(P, rng, 20):
        value, gradient = fvs_eval(elem, p)
        assert value == pytest.approx(f(*p), abs=1e-10)
        assert np.allclose(gradient, grad(*p), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_unisolvence_round_trip(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_quad(rng)
    dofs = rng.normal(size=16)
    back = element_dofs(fvs_solve_element(P, dofs)).as_vector()
    assert np.max(np.abs(back - dofs)) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_sub_triangles_agree_on_diagonals(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_quad(rng)
    elem = fvs_solve_element(P, rng.normal(size=16))
    C = elem.center
    vals = [patch_eval(elem, k, C) for k in range(4)]
    for v, g in vals[1:]:
        assert v == pytest.approx(vals[0][0], abs=1e-10)
        assert np.allclose(g, vals[0][1], atol=1e-9)
    for k in range(4):
        for t in (0.25, 0.6):
            q = C + t * (P[k] - C)
            a, ga = patch_eval(elem, (k - 1) % 4, q)
            b, gb = patch_eval(elem, k, q)
            assert a == pytest.approx(b, abs=1e-10)
            assert np.allclose(ga, gb, atol=1e-8)


def test_vector_valued_dofs():
    rng = np.random.default_rng(0)
    vec = rng.normal(size=(16, 3))
    elem = fvs_solve_element(UNIT_SQUARE, vec)
    for c in range(3):
        single = fvs_solve_element(UNIT_SQUARE, vec[:, c])
        assert np.allclose(elem.coefs[..., c], single.coefs)


@pytest.mark.parametrize("P", [
    [[0, 0], [1, 0], [0.2, 0.2], [0, 1]],      # reflex corner
    [[0, 0], [0, 1], [1, 1], [1, 0]],          # clockwise
    [[0, 0], [1, 0], [2, 0], [0, 1]],          # degenerate
])
def test_nonconvex_rejected(P):
    with pytest.raises(GeometryError):
        fvs_solve_element(P, np.zeros(16))


def test_point_outside_rejected():
    elem = fvs_solve_element(UNIT_SQUARE, np.zeros(16))
    assert locate(elem, (0.5, 0.9))[0] == 2
    with pytest.raises(ValueError):
        fvs_eval(elem, (1.5, 0.5))


def torus_error(W, k=4):
    """Max distance between the FVS surface and the torus on a ``(k+1)**2`` grid per cell."""
    spec = BranchedCoverSpec(TorusGrid(W, W), 1)
    cfg = EmbeddingConfig(k=k)
    surf = fvs_surface(spec, cfg)
    probe = fvs_solve_element(UNIT_SQUARE, np.zeros(16))
    ts = [a / k for a in range(k + 1)]
    plan = [(x, y, locate(probe, (x, y))) for x in ts for y in ts]
    worst = 0.0
    for cell in spec.grid.cells():
        coefs = np.tensordot(surf.operator, surf.cell_dofs(cell, 0), axes=(1, 0)).reshape(4, 10, 3)
        for x, y, (tri, lam, _) in plan:
            got = bb_basis(lam) @ coefs[tri]
            want = torus_embed(spec.grid, 0, cell[0] + x, cell[1] + y, cfg)
            worst = max(worst, float(np.max(np.abs(got - want))))
    return worst


@pytest.mark.slow
def test_torus_reproduction_converges():
    e20, e40, e80 = torus_error(20), torus_error(40), torus_error(80)
    # fourth-order convergence of a C1 cubic interpolant
    assert 12 < e20 / e40 < 20 and 12 < e40 / e80 < 20
    assert e80 <= 1e-6


def test_trivial_cover_surface_has_genus_one():
    spec = BranchedCoverSpec(TorusGrid(8, 8), 1)
    rep = mesh_report(build_fvs_surface(spec, EmbeddingConfig(k=2)))
    assert rep.manifold and rep.genus == 1


def test_double_cover_scan(double):
    surf = fvs_surface(double, EmbeddingConfig())
    rep = scan_fvs_surface(surf)
    assert rep.passed, rep.summary()
    assert rep.max_value_gap <= 1e-10 and rep.max_gradient_gap <= 1e-8
    assert any(e.edge.exempt for e in rep.edges)
