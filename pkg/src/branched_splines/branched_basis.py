"""Lifting biperiodic B-splines through a branched cover.

Each base B-spline pulls back to ``n`` copies over its support, one per
sheet. Where the cut system runs through the support those copies get glued
together; the connected components of the ``(support cell, sheet)`` graph are
the branched basis functions. A component that covers every support cell
``m`` times is a single function wrapping ``m`` sheets and carries one
coefficient.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .base_splines import BaseBasis, BasePoint, active_anchors, bspline_piece, support_cells
from .cover import BranchedCoverSpec, corner_cells, cycles, ramification_points, vertex_monodromy

REGULAR = "regular"
RAMIFIED = "ramified"
IRREGULAR = "irregular"

Node = tuple[tuple[int, int], int]


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class CoverPoint:
    base: BasePoint
    sheet: int


@dataclass
class LiftComponent:
    base: BaseBasis
    nodes: frozenset[Node]
    multiplicity: int
    kind: str = REGULAR
    ramification_index: int | None = None
    boundary_ramification: bool = False

    @property
    def label(self) -> str:
        if self.kind == RAMIFIED:
            return f"ramified({self.ramification_index})"
        return self.kind

    def sheets_at(self, cell: tuple[int, int]) -> list[int]:
        return sorted(s for c, s in self.nodes if c == cell)


@dataclass
class BranchedBasis:
    spec: BranchedCoverSpec
    degree: int
    components: list[LiftComponent]
    lookup: dict[tuple[tuple[int, int], tuple[int, int], int], int]
    _coef_index: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.components)

    def counts(self) -> dict[str, int]:
        out = {REGULAR: 0, RAMIFIED: 0, IRREGULAR: 0}
        for c in self.components:
            out[c.kind] += 1
        return out

    def cell_indices(self, cell, sheet) -> np.ndarray:
        """Component indices of the active bases on ``(cell, sheet)``, shaped ``(d+1, d+1)``.

        Entry ``[a, b]`` belongs to the basis whose support starts ``a`` cells
        left and ``b`` cells below ``cell``.
        """
        key = (cell, sheet)
        idx = self._coef_index.get(key)
        if idx is None:
            d = self.degree
            idx = np.empty((d + 1, d + 1), dtype=int)
            for anchor, (a, b) in active_anchors(self.spec.grid, d, cell):
                idx[a, b] = self.lookup[(anchor, cell, sheet)]
            self._coef_index[key] = idx
        return idx

    def census_csv(self) -> str:
        """Per-base-basis component counts by class."""
        per = {}
        for c in self.components:
            row = per.setdefault(c.base.anchor, {REGULAR: 0, RAMIFIED: 0, IRREGULAR: 0, "boundary": False})
            row[c.kind] += 1
            row["boundary"] |= c.boundary_ramification
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["anchor_i", "anchor_j", "components", "regular", "ramified", "irregular",
                    "boundary_ramification"])
        for (i, j), row in sorted(per.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            total = row[REGULAR] + row[RAMIFIED] + row[IRREGULAR]
            w.writerow([i, j, total, row[REGULAR], row[RAMIFIED], row[IRREGULAR], int(row["boundary"])])
        return buf.getvalue()

    def census(self) -> dict:
        counts = self.counts()
        return {
            "degree": self.degree,
            "components": len(self),
            **counts,
            "boundary_ramification": sum(c.boundary_ramification for c in self.components),
        }


class _DisjointSets:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _support_components(spec: BranchedCoverSpec, b: BaseBasis) -> list[frozenset[Node]]:
    cells = support_cells(b)
    d = b.degree
    nodes = [(c, s) for c in cells for s in range(spec.sheets)]
    sets = _DisjointSets(nodes)
    for c in cells:
        a, e = b.offset_of(c)
        for s in range(spec.sheets):
            if a < d:
                sets.union((c, s), spec.step(c, s, 1, 0))
            if e < d:
                sets.union((c, s), spec.step(c, s, 0, 1))
    groups: dict[Node, list[Node]] = {}
    for node in nodes:
        groups.setdefault(sets.find(node), []).append(node)
    # deterministic order: by the first node in (row-major cell, sheet) order
    return [frozenset(g) for g in groups.values()]


def _interior_vertices(b: BaseBasis):
    i, j = b.anchor
    return [b.grid.wrap(i + a, j + c) for c in range(1, b.degree + 1) for a in range(1, b.degree + 1)]


def _boundary_vertices(b: BaseBasis):
    i, j = b.anchor
    d = b.degree
    return [
        b.grid.wrap(i + a, j + c)
        for c in range(d + 2) for a in range(d + 2)
        if a in (0, d + 1) or c in (0, d + 1)
    ]


def classify_component(c: LiftComponent, spec: BranchedCoverSpec,
                       branch_vertices: Mapping | None = None) -> tuple[str, int | None]:
    """``(kind, ramification index)`` of a lifted component."""
    cells = support_cells(c.base)
    per_cell = {cell: 0 for cell in cells}
    for cell, _ in c.nodes:
        per_cell[cell] += 1
    counts = set(per_cell.values())
    if len(counts) != 1:
        return IRREGULAR, None
    m = counts.pop()
    if m == 1:
        return REGULAR, None
    if branch_vertices is None:
        branch_vertices = {r.vertex: r for r in ramification_points(spec)}
    for v in _interior_vertices(c.base):
        if v not in branch_vertices:
            continue
        ur = corner_cells(spec.grid, v)[0]
        mine = set(c.sheets_at(ur))
        for cyc in cycles(vertex_monodromy(spec, v)):
            if len(cyc) == m and set(cyc) <= mine:
                return RAMIFIED, m
    return IRREGULAR, None


def enumerate_components(spec: BranchedCoverSpec, d: int) -> BranchedBasis:
    grid = spec.grid
    if grid.W <= d + 1 or grid.H <= d + 1:
        raise ValueError(f"grid {grid.W}x{grid.H} too small for degree {d}")
    branch = {r.vertex: r for r in ramification_points(spec)}
    components: list[LiftComponent] = []
    lookup = {}
    for anchor in grid.cells():
        b = BaseBasis(grid, d, anchor)
        on_boundary = any(v in branch for v in _boundary_vertices(b))
        for nodes in _support_components(spec, b):
            per_cell = len(nodes) // (d + 1) ** 2
            comp = LiftComponent(b, nodes, max(per_cell, 1))
            kind, e = classify_component(comp, spec, branch)
            comp.kind, comp.ramification_index = kind, e
            if kind == IRREGULAR:
                comp.multiplicity = max(len(comp.sheets_at(cell)) for cell in support_cells(b))
            comp.boundary_ramification = on_boundary
            idx = len(components)
            components.append(comp)
            for cell, s in nodes:
                lookup[(b.anchor, cell, s)] = idx
    return BranchedBasis(spec, d, components, lookup)


def _coef_array(coefs) -> np.ndarray:
    if isinstance(coefs, np.ndarray):
        return coefs
    if isinstance(coefs, Mapping):
        n = max(coefs) + 1 if coefs else 0
        missing = [k for k in range(n) if k not in coefs]
        if missing:
            raise ConfigurationError(f"missing coefficients for components {missing[:5]}")
        return np.asarray([coefs[k] for k in range(n)], dtype=float)
    return np.asarray(coefs, dtype=float)


def _check_coefs(basis: BranchedBasis, arr: np.ndarray) -> None:
    if arr.shape[0] != len(basis):
        raise ConfigurationError(f"{arr.shape[0]} coefficients for {len(basis)} components")


def _piece_weights(d: int, x: float) -> np.ndarray:
    """``w[a]`` = value at local ``x`` of the 1-D basis whose support starts ``a`` cells back."""
    return np.array([bspline_piece(d, a, x) for a in range(d + 1)])


def eval_branched_spline(basis: BranchedBasis, coefs, p: CoverPoint):
    arr = _coef_array(coefs)
    _check_coefs(basis, arr)
    return eval_piece(basis, arr, p.base.cell, p.sheet, *p.base.local)


def eval_piece(basis: BranchedBasis, coefs: np.ndarray, cell, sheet: int, x: float, y: float):
    """Polynomial piece of the spline on cover cell ``(cell, sheet)`` at local ``(x, y)``.

    ``(x, y)`` may leave the unit square; the piece is then extrapolated.
    """
    idx = basis.cell_indices(tuple(cell), sheet)
    d = basis.degree
    wx = _piece_weights(d, x)
    wy = _piece_weights(d, y)
    c = coefs[idx]
    return np.tensordot(np.outer(wx, wy), c, axes=([0, 1], [0, 1]))


def cell_samples(basis: BranchedBasis, coefs: np.ndarray, cell, sheet: int, ts: Sequence[float]) -> np.ndarray:
    """Spline values on the tensor grid ``ts x ts`` of a cover cell, indexed ``[ix, iy, ...]``."""
    idx = basis.cell_indices(tuple(cell), sheet)
    d = basis.degree
    w = np.array([[bspline_piece(d, a, t) for a in range(d + 1)] for t in ts])
    c = coefs[idx]
    return np.einsum("ia,jb,ab...->ij...", w, w, c)


def component_at(basis: BranchedBasis, anchor, cell, sheet) -> int:
    try:
        return basis.lookup[(tuple(anchor), tuple(cell), sheet)]
    except KeyError:
        raise ConfigurationError(f"no component for basis {anchor} on {(cell, sheet)}") from None


def pullback_value(basis: BranchedBasis, component: int, p: CoverPoint) -> float:
    """Value of a single branched basis function at ``p``."""
    comp = basis.components[component]
    if (p.base.cell, p.sheet) not in comp.nodes:
        return 0.0
    off = comp.base.offset_of(p.base.cell)
    d = basis.degree
    return bspline_piece(d, off[0], p.base.local[0]) * bspline_piece(d, off[1], p.base.local[1])


def random_cover_points(spec: BranchedCoverSpec, count: int, rng: np.random.Generator) -> list[CoverPoint]:
    grid = spec.grid
    ci = rng.integers(0, grid.W, count)
    cj = rng.integers(0, grid.H, count)
    xy = rng.random((count, 2))
    sh = rng.integers(0, spec.sheets, count)
    return [
        CoverPoint(BasePoint((int(i), int(j)), (float(x), float(y))), int(s))
        for i, j, (x, y), s in zip(ci, cj, xy, sh)
    ]


def partition_of_unity_error(basis: BranchedBasis, points: Sequence[CoverPoint]) -> float:
    ones = np.ones(len(basis))
    return max(abs(float(eval_branched_spline(basis, ones, p)) - 1.0) for p in points)
