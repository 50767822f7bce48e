from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branched_splines.base_splines import (
    BaseBasis, BasePoint, Poly2, TorusGrid, base_basis_eval, bspline_eval_1d, bspline_piece,
    bspline_piece_coefficients, monomials, support_cells,
)

GRID = TorusGrid(20, 20)


def cardinal_closed_form(d, u):
    """Cardinal B-splines of degree <= 2 written out piece by piece."""
    if d == 1:
        return u if u < 1 else 2 - u
    if d == 2:
        if u < 1:
            return u * u / 2
        if u < 2:
            return (-2 * u * u + 6 * u - 3) / 2
        return (3 - u) ** 2 / 2
    raise NotImplementedError


def test_bspline_eval_1d_examples():
    assert bspline_eval_1d(1, 1.0) == 1.0
    assert bspline_eval_1d(2, 1.5) == pytest.approx(0.75, abs=1e-15)
    assert bspline_eval_1d(2, 0.0) == 0.0
    assert bspline_eval_1d(2, 3.0) == 0.0


@pytest.mark.parametrize("u", [-0.1, 3.0001])
def test_bspline_eval_1d_domain(u):
    with pytest.raises(ValueError):
        bspline_eval_1d(2, u)


@pytest.mark.parametrize("d", [1, 2])
@given(u=st.floats(0, 3, allow_nan=False))
def test_cox_de_boor_matches_closed_form(d, u):
    if u > d + 1:
        return
    expected = 0.0 if u == d + 1 else cardinal_closed_form(d, u)
    assert bspline_eval_1d(d, u) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_truncated_power_pieces_match_recursion(d):
    for a in range(d + 1):
        for t in (0.0, 0.125, 0.5, 0.9):
            assert bspline_piece(d, a, t) == pytest.approx(bspline_eval_1d(d, a + t), abs=1e-13)


def test_pieces_sum_to_one_exactly():
    # partition of unity on a cell is a polynomial identity
    for d in range(5):
        total = [sum(c) for c in zip(*(bspline_piece_coefficients(d, a) for a in range(d + 1)))]
        assert total == [1] + [0] * d


def test_grid_invariants():
    assert GRID.num_vertices - GRID.num_edges + GRID.num_faces == 0
    with pytest.raises(ValueError):
        TorusGrid(3, 10)


def test_base_basis_examples():
    hat = BaseBasis(GRID, 1, (4, 7))
    assert hat.greville == (5.0, 8.0)
    assert base_basis_eval(hat, BasePoint((5, 8), (0.0, 0.0))) == 1.0
    quad = BaseBasis(GRID, 2, (4, 7))
    g = BasePoint.from_global(GRID, *quad.greville)
    assert base_basis_eval(quad, g) == pytest.approx(0.5625, abs=1e-15)
    assert base_basis_eval(quad, BasePoint((7, 7), (0.5, 0.5))) == 0.0
    assert base_basis_eval(quad, BasePoint((4, 10), (0.0, 0.0))) == 0.0


def test_degree_needs_room():
    with pytest.raises(ValueError):
        BaseBasis(TorusGrid(4, 4), 3, (0, 0))


def test_support_cells_examples():
    assert support_cells(BaseBasis(GRID, 1, (0, 0))) == [(0, 0), (1, 0), (0, 1), (1, 1)]
    cells = support_cells(BaseBasis(GRID, 2, (19, 19)))
    assert len(cells) == 9 and len(set(cells)) == 9
    assert {(0, 0), (1, 1), (19, 19), (1, 19)} <= set(cells)


points = st.builds(
    BasePoint,
    st.tuples(st.integers(0, 19), st.integers(0, 19)),
    st.tuples(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True)),
)


@pytest.mark.parametrize("d", [1, 2])
@settings(max_examples=50, deadline=None)
@given(p=points)
def test_partition_of_unity_and_nonnegativity(d, p):
    vals = [base_basis_eval(BaseBasis(GRID, d, a), p) for a in GRID.cells()]
    assert min(vals) >= 0.0
    assert sum(vals) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50)
@given(p=points, i=st.integers(0, 19), j=st.integers(0, 19), d=st.sampled_from([1, 2]))
def test_translation_symmetry(p, i, j, d):
    moved = BasePoint(GRID.wrap(p.cell[0] - i, p.cell[1] - j), p.local)
    assert base_basis_eval(BaseBasis(GRID, d, (i, j)), p) == base_basis_eval(BaseBasis(GRID, d, (0, 0)), moved)


def test_poly2_arithmetic():
    x, y = Poly2.x(), Poly2.y()
    p = (x + y) ** 2 - x * x - 2 * x * y
    assert p == y * y
    assert p.degree == 2
    assert Poly2().degree == -1
    assert (x - x).is_zero()
    assert Poly2({(1, 0): 0, (0, 0): 3}).coefs == {(0, 0): Fraction(3)}
    assert (x * Fraction(1, 3))(3, 5) == 1


def test_monomials_count():
    assert len(monomials(3)) == 10
    assert monomials(1) == [(0, 0), (1, 0), (0, 1)]
