import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branched_splines.analyzer import numeric_smoothness_scan
from branched_splines.base_splines import BaseBasis, BasePoint, base_basis_eval
from branched_splines.branched_basis import (
    IRREGULAR, RAMIFIED, REGULAR, ConfigurationError, CoverPoint, component_at, enumerate_components,
    eval_branched_spline, eval_piece, partition_of_unity_error, pullback_value, random_cover_points,
)
from branched_splines.cover import cover_topology
from branched_splines.geometry import bspline_scan_edges
from oracles import random_cut_system, support_component_count

seeds = st.integers(0, 2**32 - 1)


def test_example_counts(triple, triple_bases, double_bases):
    assert len(triple_bases[1]) == 1196 == cover_topology(triple).V
    assert len(triple_bases[2]) == 1184
    assert triple_bases[1].counts() == {REGULAR: 1194, RAMIFIED: 2, IRREGULAR: 0}
    assert triple_bases[2].counts() == {REGULAR: 1176, RAMIFIED: 8, IRREGULAR: 0}
    assert len(double_bases[1]) == 798
    assert len(double_bases[2]) == 792


@pytest.mark.parametrize("d", [1, 2])
def test_counts_match_support_bfs(triple, double, d):
    assert len(enumerate_components(triple, d)) == support_component_count(triple, d)
    assert len(enumerate_components(double, d)) == support_component_count(double, d)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, d=st.sampled_from([1, 2]))
def test_counts_match_oracle_on_random_covers(seed, d):
    spec = random_cut_system(np.random.default_rng(seed))
    basis = enumerate_components(spec, d)
    assert len(basis) == support_component_count(spec, d)
    # every (support cell, sheet) node belongs to exactly one component
    assert sum(len(c.nodes) for c in basis.components) == spec.sheets * spec.grid.W * spec.grid.H * (d + 1) ** 2
    if d == 1:
        assert len(basis) == cover_topology(spec).V


def test_classification_examples(triple_bases):
    hats = triple_bases[1]
    ram = [c for c in hats.components if c.kind == RAMIFIED]
    assert sorted(c.base.anchor for c in ram) == [(9, 7), (9, 11)]
    assert all(c.label == "ramified(3)" and c.multiplicity == 3 for c in ram)

    quads = triple_bases[2]
    anchors = sorted(c.base.anchor for c in quads.components if c.kind == RAMIFIED)
    assert anchors == sorted([(8, 6), (9, 6), (8, 7), (9, 7), (8, 10), (9, 10), (8, 11), (9, 11)])

    far = [c for c in quads.components if c.base.anchor == (0, 0)]
    assert len(far) == 3 and all(c.kind == REGULAR and not c.boundary_ramification for c in far)
    # branch vertex (10, 8) sits on the support boundary of anchor (10, 8)
    edge = [c for c in quads.components if c.base.anchor == (10, 8)]
    assert all(c.kind == REGULAR and c.boundary_ramification for c in edge)


def test_ramified_component_at_branch_vertex(triple_bases):
    hats = triple_bases[1]
    k = component_at(hats, (9, 7), (10, 8), 0)
    assert hats.components[k].kind == RAMIFIED
    base = BaseBasis(hats.spec.grid, 1, (9, 7))
    for s in range(3):
        for local in [(0.0, 0.0), (0.25, 0.5), (0.9, 0.1)]:
            p = BasePoint((10, 8), local)
            assert pullback_value(hats, k, CoverPoint(p, s)) == pytest.approx(base_basis_eval(base, p), abs=1e-15)
    assert pullback_value(hats, k, CoverPoint(BasePoint((0, 0), (0.5, 0.5)), 0)) == 0.0


def test_unit_coefficient_matches_pullback(triple_bases):
    quads = triple_bases[2]
    rng = np.random.default_rng(3)
    pts = random_cover_points(quads.spec, 200, rng)
    for k in [0, 17, component_at(quads, (9, 7), (10, 8), 1)]:
        e = np.zeros(len(quads))
        e[k] = 1.0
        for p in pts:
            assert eval_branched_spline(quads, e, p) == pytest.approx(pullback_value(quads, k, p), abs=1e-15)


@pytest.mark.parametrize("d", [1, 2])
def test_partition_of_unity(triple_bases, double_bases, d):
    rng = np.random.default_rng(d)
    for basis in (triple_bases[d], double_bases[d]):
        assert partition_of_unity_error(basis, random_cover_points(basis.spec, 2000, rng)) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=seeds, d=st.sampled_from([1, 2]))
def test_partition_of_unity_random_covers(seed, d):
    rng = np.random.default_rng(seed)
    spec = random_cut_system(rng)
    basis = enumerate_components(spec, d)
    assert partition_of_unity_error(basis, random_cover_points(spec, 200, rng)) <= 1e-12


@pytest.mark.parametrize("d", [1, 2])
def test_random_coefficients_are_smooth_off_branch_points(triple_bases, d):
    basis = triple_bases[d]
    coefs = np.random.default_rng(7).normal(size=len(basis))

    def piece(key, x, y):
        return eval_piece(basis, coefs, key[0], key[1], x, y)

    rep = numeric_smoothness_scan(piece, bspline_scan_edges(basis.spec), d - 1, 1e-10, grad_tol=1e-8)
    assert rep.passed, rep.summary()


def test_coefficient_errors(triple_bases):
    hats = triple_bases[1]
    p = CoverPoint(BasePoint((0, 0), (0.5, 0.5)), 0)
    with pytest.raises(ConfigurationError):
        eval_branched_spline(hats, np.ones(len(hats) - 1), p)
    coefs = {k: 1.0 for k in range(len(hats)) if k != 5}
    with pytest.raises(ConfigurationError):
        eval_branched_spline(hats, coefs, p)
    with pytest.raises(ConfigurationError):
        component_at(hats, (0, 0), (5, 5), 0)


def test_census_csv(triple_bases):
    lines = triple_bases[2].census_csv().splitlines()
    assert lines[0].startswith("anchor_i,anchor_j,components")
    assert len(lines) == 401
    assert "9,7,1,0,1,0,0" in lines
    assert "10,8,3,3,0,0,1" in lines
