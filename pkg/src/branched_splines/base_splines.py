"""Uniform biperiodic tensor-product B-splines on a gridded torus.

The torus is the rectangle ``[0, W] x [0, H]`` with opposite sides
identified and partitioned by the integer lines. Cell ``(i, j)`` is the unit
square with lower-left corner ``(i, j)``; vertex ``(i, j)`` is the integer
point ``(i, j)``.

Also home of :class:`Poly2`, a small exact bivariate polynomial type used by
the smoothness analyzer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping


@dataclass(frozen=True)
class TorusGrid:
    W: int
    H: int

    def __post_init__(self):
        if self.W < 4 or self.H < 4:
            raise ValueError(f"torus grid must be at least 4x4, got {self.W}x{self.H}")

    @property
    def num_vertices(self) -> int:
        return self.W * self.H

    @property
    def num_edges(self) -> int:
        return 2 * self.W * self.H

    @property
    def num_faces(self) -> int:
        return self.W * self.H

    def wrap(self, i: int, j: int) -> tuple[int, int]:
        return i % self.W, j % self.H

    def cells(self) -> Iterator[tuple[int, int]]:
        """Cells in row-major order (``j`` outer)."""
        for j in range(self.H):
            for i in range(self.W):
                yield (i, j)

    vertices = cells

    def torus_distance(self, p, q) -> float:
        """Euclidean distance on the flat torus (minimum image)."""
        dx = abs(p[0] - q[0]) % self.W
        dy = abs(p[1] - q[1]) % self.H
        return math.hypot(min(dx, self.W - dx), min(dy, self.H - dy))


@dataclass(frozen=True)
class BasePoint:
    cell: tuple[int, int]
    local: tuple[float, float]

    def global_coords(self, grid: TorusGrid) -> tuple[float, float]:
        x = (self.cell[0] + self.local[0]) % grid.W
        y = (self.cell[1] + self.local[1]) % grid.H
        return x, y

    @classmethod
    def from_global(cls, grid: TorusGrid, x: float, y: float) -> "BasePoint":
        x %= grid.W
        y %= grid.H
        i, j = int(math.floor(x)), int(math.floor(y))
        # guard against x % W == W after rounding
        i, j = min(i, grid.W - 1), min(j, grid.H - 1)
        return cls((i, j), (x - i, y - j))


@dataclass(frozen=True)
class BaseBasis:
    """Biperiodic B-spline of degree ``d`` whose support has lower-left cell ``anchor``."""

    grid: TorusGrid
    degree: int
    anchor: tuple[int, int]

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        if self.grid.W <= self.degree + 1 or self.grid.H <= self.degree + 1:
            raise ValueError(f"degree {self.degree} support would self-wrap on {self.grid}")
        object.__setattr__(self, "anchor", self.grid.wrap(*self.anchor))

    @property
    def greville(self) -> tuple[float, float]:
        half = (self.degree + 1) / 2
        return ((self.anchor[0] + half) % self.grid.W, (self.anchor[1] + half) % self.grid.H)

    @property
    def greville_cell(self) -> tuple[int, int]:
        """Cell containing the Greville point, taking the upper-right cell at a vertex."""
        half = (self.degree + 1) // 2
        return self.grid.wrap(self.anchor[0] + half, self.anchor[1] + half)

    def offset_of(self, cell: tuple[int, int]) -> tuple[int, int] | None:
        """Position ``(a, b)`` of ``cell`` inside the support block, or None."""
        a = (cell[0] - self.anchor[0]) % self.grid.W
        b = (cell[1] - self.anchor[1]) % self.grid.H
        if a <= self.degree and b <= self.degree:
            return a, b
        return None


def bspline_eval_1d(d: int, u: float) -> float:
    """Cardinal B-spline of degree ``d`` on knots ``0, 1, ..., d+1`` via Cox-de Boor."""
    if not 0.0 <= u <= d + 1:
        raise ValueError(f"u={u} outside the support [0, {d + 1}]")
    if u == d + 1:
        return 0.0
    # degree-0 indicators on [k, k+1)
    vals = [1.0 if k <= u < k + 1 else 0.0 for k in range(d + 1)]
    for p in range(1, d + 1):
        vals = [
            ((u - k) * vals[k] + (k + p + 1 - u) * vals[k + 1]) / p
            for k in range(d + 1 - p)
        ]
    return vals[0]


@lru_cache(maxsize=None)
def bspline_piece_coefficients(d: int, a: int) -> tuple[Fraction, ...]:
    """Monomial coefficients in ``t`` of the cardinal B-spline on ``[a, a+1]``.

    Uses the truncated-power form ``(1/d!) sum_k (-1)^k C(d+1,k) (u-k)_+^d``
    restricted to ``k <= a``, so the piece extends polynomially past its cell.
    """
    if not 0 <= a <= d:
        raise ValueError(f"piece index {a} out of range for degree {d}")
    coefs = [Fraction(0)] * (d + 1)
    for k in range(a + 1):
        c = Fraction((-1) ** k * math.comb(d + 1, k), math.factorial(d))
        # (t + (a - k))^d expanded in t
        s = a - k
        for e in range(d + 1):
            coefs[e] += c * math.comb(d, e) * s ** (d - e)
    return tuple(coefs)


def bspline_piece(d: int, a: int, t: float) -> float:
    """Polynomial piece ``a`` of the cardinal B-spline at local ``t`` (may extrapolate)."""
    coefs = _float_piece(d, a)
    acc = 0.0
    for c in reversed(coefs):
        acc = acc * t + c
    return acc


@lru_cache(maxsize=None)
def _float_piece(d: int, a: int) -> tuple[float, ...]:
    return tuple(float(c) for c in bspline_piece_coefficients(d, a))


def base_basis_eval(b: BaseBasis, p: BasePoint) -> float:
    off = b.offset_of(p.cell)
    if off is None:
        return 0.0
    d = b.degree
    return bspline_eval_1d(d, off[0] + p.local[0]) * bspline_eval_1d(d, off[1] + p.local[1])


def support_cells(b: BaseBasis) -> list[tuple[int, int]]:
    """The ``(d+1)**2`` support cells, row-major from the anchor."""
    i, j = b.anchor
    return [b.grid.wrap(i + a, j + c) for c in range(b.degree + 1) for a in range(b.degree + 1)]


def active_anchors(grid: TorusGrid, d: int, cell: tuple[int, int]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """``(anchor, offset)`` pairs of every degree-``d`` basis whose support holds ``cell``."""
    i, j = cell
    return [
        (grid.wrap(i - a, j - c), (a, c))
        for c in range(d + 1)
        for a in range(d + 1)
    ]


class Poly2:
    """Exact bivariate polynomial: a map from monomial ``(a, b)`` to a nonzero rational."""

    __slots__ = ("_c",)

    def __init__(self, coefs: Mapping[tuple[int, int], object] | None = None):
        c = {}
        for mono, v in (coefs or {}).items():
            v = Fraction(v)
            if v:
                a, b = mono
                if a < 0 or b < 0:
                    raise ValueError(f"negative exponent in {mono}")
                c[(int(a), int(b))] = v
        self._c = c

    @classmethod
    def const(cls, v) -> "Poly2":
        return cls({(0, 0): v})

    @classmethod
    def x(cls) -> "Poly2":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "Poly2":
        return cls({(0, 1): 1})

    @property
    def coefs(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._c)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((a + b for a, b in self._c), default=-1)

    def is_zero(self) -> bool:
        return not self._c

    def __getitem__(self, mono) -> Fraction:
        return self._c.get(tuple(mono), Fraction(0))

    def __iter__(self):
        return iter(self._c.items())

    def __eq__(self, other):
        if not isinstance(other, Poly2):
            other = Poly2.const(other)
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __add__(self, other):
        if not isinstance(other, Poly2):
            other = Poly2.const(other)
        out = dict(self._c)
        for m, v in other._c.items():
            out[m] = out.get(m, 0) + v
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({m: -v for m, v in self._c.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly2) else Poly2.const(-Fraction(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly2):
            f = Fraction(other)
            return Poly2({m: v * f for m, v in self._c.items()})
        out: dict[tuple[int, int], Fraction] = {}
        for (a1, b1), v1 in self._c.items():
            for (a2, b2), v2 in other._c.items():
                m = (a1 + a2, b1 + b2)
                out[m] = out.get(m, 0) + v1 * v2
        return Poly2(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        out, base = Poly2.const(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __call__(self, x, y):
        return sum(v * x**a * y**b for (a, b), v in self._c.items())

    def __repr__(self):
        if not self._c:
            return "Poly2(0)"
        terms = [f"{v}*x^{a}*y^{b}" for (a, b), v in sorted(self._c.items())]
        return "Poly2(" + " + ".join(terms) + ")"


def monomials(max_degree: int) -> list[tuple[int, int]]:
    """Monomials of total degree ``<= max_degree``, graded then by decreasing x power."""
    return [(t - b, b) for t in range(max_degree + 1) for b in range(t + 1)]
