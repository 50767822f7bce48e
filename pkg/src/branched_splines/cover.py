"""Combinatorial branched covers of the torus grid.

A cover with ``n`` sheets is described by a cut system: grid edges carrying a
sheet permutation. Sheet labels are local to each cell; stepping from cell
``(i, j)`` to ``(i+1, j)`` across an edge with crossing ``sigma`` (direction
``+x``) maps sheet ``s`` to ``sigma[s]``. Stepping the other way applies the
inverse. Edges without a crossing keep the label.

Permutations are tuples ``p`` with ``p[s]`` the image of ``s``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .base_splines import TorusGrid

Perm = tuple[int, ...]
Cell = tuple[int, int]
Vertex = tuple[int, int]

DIRECTIONS = ("+x", "+y")


class CoverError(ValueError):
    """A cover specification that violates its invariants."""

    def __init__(self, violations: Sequence[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


def identity(n: int) -> Perm:
    return tuple(range(n))


def compose(first: Perm, then: Perm) -> Perm:
    """Apply ``first``, then ``then``."""
    return tuple(then[s] for s in first)


def inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for s, t in enumerate(p):
        out[t] = s
    return tuple(out)


def cycles(p: Perm) -> list[tuple[int, ...]]:
    seen = set()
    out = []
    for s in range(len(p)):
        if s in seen:
            continue
        cyc = []
        t = s
        while t not in seen:
            seen.add(t)
            cyc.append(t)
            t = p[t]
        out.append(tuple(cyc))
    return out


def cyclic_shift(n: int, k: int = 1) -> Perm:
    return tuple((s + k) % n for s in range(n))


@dataclass(frozen=True)
class CutCrossing:
    cell: Cell
    direction: str
    permutation: Perm

    def __post_init__(self):
        object.__setattr__(self, "cell", tuple(self.cell))
        object.__setattr__(self, "permutation", tuple(self.permutation))

    @property
    def key(self) -> tuple[Cell, str]:
        return self.cell, self.direction


@dataclass(frozen=True)
class Ramification:
    vertex: Vertex
    cycle_type: tuple[int, ...]

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(c for c in self.cycle_type if c > 1)


@dataclass(frozen=True)
class CoverTopology:
    V: int
    E: int
    F: int
    chi: int
    genus: int
    ramification: tuple[Ramification, ...]

    @property
    def total_ramification(self) -> int:
        return sum(e - 1 for r in self.ramification for e in r.indices)

    def as_dict(self) -> dict:
        return {
            "V": self.V, "E": self.E, "F": self.F, "chi": self.chi, "genus": self.genus,
            "ramification": [
                {"vertex": list(r.vertex), "cycle_type": list(r.cycle_type), "indices": list(r.indices)}
                for r in self.ramification
            ],
        }


@dataclass(frozen=True)
class BranchedCoverSpec:
    grid: TorusGrid
    sheets: int
    crossings: tuple[CutCrossing, ...] = ()
    _table: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _orbits: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "crossings", tuple(self.crossings))
        table = {}
        for c in self.crossings:
            if c.direction in DIRECTIONS and len(c.cell) == 2:
                table.setdefault((self.grid.wrap(*c.cell), c.direction), c.permutation)
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_orbits", {})

    def crossing(self, cell: Cell, direction: str) -> Perm:
        return self._table.get((self.grid.wrap(*cell), direction), identity(self.sheets))

    def step(self, cell: Cell, sheet: int, di: int, dj: int) -> tuple[Cell, int]:
        """Move one cell in direction ``(di, dj)`` (a unit axis step)."""
        i, j = cell
        W, H = self.grid.W, self.grid.H
        if (di, dj) == (1, 0):
            return ((i + 1) % W, j), self.crossing(cell, "+x")[sheet]
        if (di, dj) == (-1, 0):
            prev = ((i - 1) % W, j)
            return prev, inverse(self.crossing(prev, "+x"))[sheet]
        if (di, dj) == (0, 1):
            return (i, (j + 1) % H), self.crossing(cell, "+y")[sheet]
        if (di, dj) == (0, -1):
            prev = (i, (j - 1) % H)
            return prev, inverse(self.crossing(prev, "+y"))[sheet]
        raise ValueError(f"not a unit step: {(di, dj)}")

    def cover_cells(self) -> Iterable[tuple[Cell, int]]:
        for cell in self.grid.cells():
            for s in range(self.sheets):
                yield cell, s


def default_cut(grid: TorusGrid, sheets: int, perm: Perm, x: int = 10, y0: int = 8, y1: int = 12) -> BranchedCoverSpec:
    """Straight vertical cut on ``x`` from ``(x, y0)`` to ``(x, y1)``."""
    crossings = [CutCrossing((x - 1, j), "+x", perm) for j in range(y0, y1)]
    return BranchedCoverSpec(grid, sheets, tuple(crossings))


def example_triple_cover() -> BranchedCoverSpec:
    return default_cut(TorusGrid(20, 20), 3, cyclic_shift(3))


def example_double_cover() -> BranchedCoverSpec:
    return default_cut(TorusGrid(20, 20), 2, (1, 0))


def _step_of(grid: TorusGrid, a: Cell, b: Cell) -> tuple[int, int]:
    di = (b[0] - a[0]) % grid.W
    dj = (b[1] - a[1]) % grid.H
    if dj == 0 and di in (1, grid.W - 1):
        return (1 if di == 1 else -1), 0
    if di == 0 and dj in (1, grid.H - 1):
        return 0, (1 if dj == 1 else -1)
    raise ValueError(f"cells {a} and {b} are not adjacent")


def transport_sheet(spec: BranchedCoverSpec, path: Sequence[Cell], start: int) -> int:
    if not 0 <= start < spec.sheets:
        raise ValueError(f"sheet {start} out of range")
    sheet = start
    cur = spec.grid.wrap(*path[0])
    for nxt in path[1:]:
        nxt = spec.grid.wrap(*nxt)
        di, dj = _step_of(spec.grid, cur, nxt)
        cur, sheet = spec.step(cur, sheet, di, dj)
    return sheet


def validate_cover(spec: BranchedCoverSpec) -> list[str]:
    """All invariant violations; an empty list means the cover is valid."""
    out = []
    n, grid = spec.sheets, spec.grid
    if n < 1:
        out.append(f"sheet count must be >= 1, got {n}")
        return out
    seen = set()
    for c in spec.crossings:
        if c.direction not in DIRECTIONS:
            out.append(f"crossing at {c.cell}: bad direction {c.direction!r}")
            continue
        if len(c.cell) != 2 or not (0 <= c.cell[0] < grid.W and 0 <= c.cell[1] < grid.H):
            out.append(f"crossing cell {c.cell} outside the {grid.W}x{grid.H} grid")
            continue
        if c.key in seen:
            out.append(f"more than one crossing on edge {c.key}")
        seen.add(c.key)
        if len(c.permutation) != n or sorted(c.permutation) != list(range(n)):
            out.append(f"crossing at {c.key}: {list(c.permutation)} is not a permutation of {n} sheets")
    if out:
        return out
    # transitivity: the cover cell graph is connected
    start = ((0, 0), 0)
    reached = {start}
    queue = deque([start])
    while queue:
        cell, s = queue.popleft()
        for step in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nb = spec.step(cell, s, *step)
            if nb not in reached:
                reached.add(nb)
                queue.append(nb)
    if len(reached) != n * grid.W * grid.H:
        out.append(f"cover is disconnected: sheets act intransitively "
                   f"({len(reached)} of {n * grid.W * grid.H} cover cells reachable)")
    return out


def require_valid(spec: BranchedCoverSpec) -> None:
    problems = validate_cover(spec)
    if problems:
        raise CoverError(problems)


# Cells around vertex v=(a, b), counterclockwise from the upper right.
_AROUND = ((0, 0), (-1, 0), (-1, -1), (0, -1))


def corner_cells(grid: TorusGrid, v: Vertex) -> list[Cell]:
    """Upper-right, upper-left, lower-left and lower-right cells of ``v``."""
    return [grid.wrap(v[0] + da, v[1] + db) for da, db in _AROUND]


def vertex_monodromy(spec: BranchedCoverSpec, v: Vertex) -> Perm:
    """Sheet permutation (labels of the upper-right cell) of a counterclockwise loop around ``v``."""
    cells = corner_cells(spec.grid, v)
    return _loop_perm(spec, cells + [cells[0]])


def _loop_perm(spec: BranchedCoverSpec, path: Sequence[Cell]) -> Perm:
    return tuple(transport_sheet(spec, path, s) for s in range(spec.sheets))


def to_upper_right(spec: BranchedCoverSpec, v: Vertex, corner: int, sheet: int) -> int:
    """Relabel ``sheet`` of corner cell ``corner`` (index into :func:`corner_cells`) in upper-right labels.

    Walks clockwise back to the upper-right cell so the loop never closes.
    """
    cells = corner_cells(spec.grid, v)
    path = [cells[k] for k in range(corner, -1, -1)]
    return transport_sheet(spec, path, sheet)


def cover_vertex(spec: BranchedCoverSpec, v: Vertex, corner: int, sheet: int) -> tuple[Vertex, int]:
    """Canonical identity of the cover vertex at corner cell ``corner`` of ``v`` on ``sheet``.

    The identity is ``(v, smallest sheet in the monodromy orbit)``.
    """
    v = spec.grid.wrap(*v)
    s = to_upper_right(spec, v, corner, sheet)
    orbit = _orbit_min(spec, v)
    return v, orbit[s]


def _orbit_min(spec: BranchedCoverSpec, v: Vertex) -> tuple[int, ...]:
    cache = spec._orbits
    if v not in cache:
        mono = vertex_monodromy(spec, v)
        table = [0] * spec.sheets
        for cyc in cycles(mono):
            m = min(cyc)
            for s in cyc:
                table[s] = m
        cache[v] = tuple(table)
    return cache[v]


def ramification_points(spec: BranchedCoverSpec) -> list[Ramification]:
    out = []
    for v in spec.grid.vertices():
        mono = vertex_monodromy(spec, v)
        if mono != identity(spec.sheets):
            ctype = tuple(sorted((len(c) for c in cycles(mono)), reverse=True))
            out.append(Ramification(v, ctype))
    return out


def cover_topology(spec: BranchedCoverSpec) -> CoverTopology:
    require_valid(spec)
    n, grid = spec.sheets, spec.grid
    V = 0
    ram = []
    for v in grid.vertices():
        mono = vertex_monodromy(spec, v)
        cyc = cycles(mono)
        V += len(cyc)
        if len(cyc) < n:
            ram.append(Ramification(v, tuple(sorted((len(c) for c in cyc), reverse=True))))
    E = n * grid.num_edges
    F = n * grid.num_faces
    chi = V - E + F
    if chi % 2:
        raise ArithmeticError(f"odd Euler characteristic {chi}")
    return CoverTopology(V, E, F, chi, 1 - chi // 2, tuple(ram))


@dataclass(frozen=True)
class CoverEdge:
    """Edge shared by cover cells ``a`` (left/below) and ``b`` (right/above)."""

    a: tuple[Cell, int]
    b: tuple[Cell, int]
    direction: str
    vertices: tuple[Vertex, Vertex]


def cover_edges(spec: BranchedCoverSpec) -> Iterable[CoverEdge]:
    """Every cover edge once: the right and top edge of each cover cell."""
    grid = spec.grid
    for cell, s in spec.cover_cells():
        i, j = cell
        yield CoverEdge((cell, s), spec.step(cell, s, 1, 0), "+x",
                        (grid.wrap(i + 1, j), grid.wrap(i + 1, j + 1)))
        yield CoverEdge((cell, s), spec.step(cell, s, 0, 1), "+y",
                        (grid.wrap(i, j + 1), grid.wrap(i + 1, j + 1)))
