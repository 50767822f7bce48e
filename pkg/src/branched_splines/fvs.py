"""Fraeijs de Veubeke-Sander C1 quadrilateral on branched quad grids.

A convex quad is split by its diagonals into four triangles; on each sits a
cubic in Bernstein-Bezier form. The C1 piecewise cubics on this split form a
16-dimensional space, fixed by value and gradient at the corners plus the
outward normal derivative at the edge midpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .analyzer import ScanEdge, SmoothnessReport, numeric_smoothness_scan
from .cover import BranchedCoverSpec, cover_edges, cover_vertex, ramification_points
from .geometry import (
    EmbeddingConfig, QuadMesh, blend_weight, nearest_branch_distance, torus_embed, torus_jacobian,
    weld_cover_mesh,
)

# cubic multi-indices (i, j, l): exponents of (center, P_k, P_k+1)
MULTI = [(i, j, 3 - i - j) for i in range(3, -1, -1) for j in range(3 - i, -1, -1)]
_EXP = np.array(MULTI).T
_MULTINOMIAL = np.array([factorial(3) / (factorial(i) * factorial(j) * factorial(l)) for i, j, l in MULTI])

UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))


class GeometryError(ValueError):
    pass


class UnisolvenceError(ArithmeticError):
    pass


@dataclass
class FvsDofs:
    """Corner values/gradients and midpoint outward normal derivatives.

    Arrays may carry a trailing axis for vector-valued fields.
    """

    values: np.ndarray      # (4, ...)
    gradients: np.ndarray   # (4, 2, ...)
    normals: np.ndarray     # (4, ...)

    def as_vector(self) -> np.ndarray:
        rows = []
        for k in range(4):
            rows += [self.values[k], self.gradients[k, 0], self.gradients[k, 1]]
        rows += [self.normals[k] for k in range(4)]
        return np.asarray(rows, dtype=float)

    @classmethod
    def from_vector(cls, vec) -> "FvsDofs":
        vec = np.asarray(vec, dtype=float)
        corner = vec[:12].reshape((4, 3) + vec.shape[1:])
        return cls(corner[:, 0], corner[:, 1:3], vec[12:16])

    @classmethod
    def from_function(cls, corners, f, grad) -> "FvsDofs":
        """Sample ``f`` and its gradient ``grad`` on a quad."""
        P = _as_corners(corners)
        values = np.array([f(*p) for p in P], dtype=float)
        gradients = np.array([grad(*p) for p in P], dtype=float)
        normals = []
        for k in range(4):
            mid = (P[k] + P[(k + 1) % 4]) / 2
            normals.append(np.tensordot(outward_normal(P, k), np.asarray(grad(*mid), dtype=float), axes=(0, 0)))
        return cls(values, gradients, np.array(normals))


def _as_corners(corners) -> np.ndarray:
    P = np.asarray(corners, dtype=float)
    if P.shape != (4, 2):
        raise GeometryError(f"expected 4 planar corners, got shape {P.shape}")
    return P


def _cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def check_convex(P: np.ndarray) -> None:
    """Strict convexity with counterclockwise orientation."""
    scale = max(float(np.max(np.abs(P[:, None] - P[None]))), 1e-300)
    for k in range(4):
        turn = _cross(P[(k + 1) % 4] - P[k], P[(k + 2) % 4] - P[(k + 1) % 4])
        if turn <= 1e-12 * scale * scale:
            raise GeometryError(f"quad {P.tolist()} is not strictly convex and counterclockwise")


def diagonal_intersection(P: np.ndarray) -> np.ndarray:
    d1, d2 = P[2] - P[0], P[3] - P[1]
    den = _cross(d1, d2)
    if abs(den) < 1e-300:
        raise GeometryError("diagonals are parallel")
    t = _cross(P[1] - P[0], d2) / den
    return P[0] + t * d1


def outward_normal(P: np.ndarray, k: int) -> np.ndarray:
    e = P[(k + 1) % 4] - P[k]
    return np.array([e[1], -e[0]]) / np.hypot(*e)


def _triangle(P, C, k):
    return np.array([C, P[k], P[(k + 1) % 4]])


def barycentric(tri: np.ndarray, p) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric coordinates of ``p`` and their (constant) gradients."""
    M = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
    Minv = np.linalg.inv(M)
    l12 = Minv @ (np.asarray(p, dtype=float) - tri[0])
    lam = np.array([1.0 - l12.sum(), l12[0], l12[1]])
    grads = np.vstack([-(Minv[0] + Minv[1]), Minv[0], Minv[1]])
    return lam, grads


def bb_basis(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    return _MULTINOMIAL * np.prod(lam[:, None] ** _EXP, axis=0)


def bb_basis_gradients(lam, lam_grads) -> np.ndarray:
    """Gradients of the 10 cubic Bernstein polynomials, shape ``(10, 2)``."""
    out = np.zeros((10, 2))
    for t, (i, j, l) in enumerate(MULTI):
        e = (i, j, l)
        for v in range(3):
            if e[v] == 0:
                continue
            lower = list(e)
            lower[v] -= 1
            a, b, c = lower
            quad = 2.0 / (factorial(a) * factorial(b) * factorial(c)) * lam[0] ** a * lam[1] ** b * lam[2] ** c
            out[t] += 3 * quad * lam_grads[v]
    return out


def de_casteljau(coefs: np.ndarray, lam) -> tuple[np.ndarray, np.ndarray]:
    """Value and the three linear-level coefficients of a cubic BB patch."""
    net = {m: coefs[t] for t, m in enumerate(MULTI)}
    deg = 3
    while deg > 1:
        deg -= 1
        net = {
            (i, j, l): lam[0] * net[(i + 1, j, l)] + lam[1] * net[(i, j + 1, l)] + lam[2] * net[(i, j, l + 1)]
            for i in range(deg, -1, -1) for j in range(deg - i, -1, -1) for l in [deg - i - j]
        }
    linear = np.array([net[(1, 0, 0)], net[(0, 1, 0)], net[(0, 0, 1)]])
    value = lam[0] * linear[0] + lam[1] * linear[1] + lam[2] * linear[2]
    return value, linear


@dataclass
class FvsElement:
    corners: np.ndarray
    center: np.ndarray
    coefs: np.ndarray    # (4, 10, ...)

    def triangle(self, k: int) -> np.ndarray:
        return _triangle(self.corners, self.center, k)

    def frame(self, k: int):
        """``(origin, inverse edge matrix, barycentric gradients)`` of sub-triangle ``k``."""
        return _frames(tuple(map(tuple, self.corners.tolist())), tuple(self.center.tolist()))[k]

    def barycentric(self, k: int, p) -> tuple[np.ndarray, np.ndarray]:
        origin, Minv, grads = self.frame(k)
        l12 = Minv @ (np.asarray(p, dtype=float) - origin)
        return np.array([1.0 - l12[0] - l12[1], l12[0], l12[1]]), grads


@lru_cache(maxsize=256)
def _frames(corners, center):
    P, C = np.array(corners), np.array(center)
    out = []
    for k in range(4):
        tri = _triangle(P, C, k)
        Minv = np.linalg.inv(np.column_stack([tri[1] - tri[0], tri[2] - tri[0]]))
        out.append((tri[0], Minv, np.vstack([-(Minv[0] + Minv[1]), Minv[0], Minv[1]])))
    return tuple(out)


def _junction_rows(P, C) -> np.ndarray:
    """Sampled C0 and C1 conditions across the four interior sub-edges."""
    rows = []
    for k in range(4):
        left, right = (k - 1) % 4, k
        tl, tr = _triangle(P, C, left), _triangle(P, C, right)
        d = P[k] - C
        n = np.array([-d[1], d[0]])
        for t in (0.0, 1 / 3, 2 / 3, 1.0):
            p = C + t * d
            row = np.zeros(40)
            row[10 * left:10 * left + 10] = bb_basis(barycentric(tl, p)[0])
            row[10 * right:10 * right + 10] -= bb_basis(barycentric(tr, p)[0])
            rows.append(row)
        for t in (0.0, 0.5, 1.0):
            p = C + t * d
            row = np.zeros(40)
            row[10 * left:10 * left + 10] = bb_basis_gradients(*barycentric(tl, p)) @ n
            row[10 * right:10 * right + 10] -= bb_basis_gradients(*barycentric(tr, p)) @ n
            rows.append(row)
    return np.array(rows)


def _dof_rows(P, C) -> np.ndarray:
    rows = np.zeros((16, 40))
    for k in range(4):
        tri = _triangle(P, C, k)
        lam, lg = barycentric(tri, P[k])
        rows[3 * k, 10 * k:10 * k + 10] = bb_basis(lam)
        g = bb_basis_gradients(lam, lg)
        rows[3 * k + 1, 10 * k:10 * k + 10] = g[:, 0]
        rows[3 * k + 2, 10 * k:10 * k + 10] = g[:, 1]
        mid = (P[k] + P[(k + 1) % 4]) / 2
        lam, lg = barycentric(tri, mid)
        rows[12 + k, 10 * k:10 * k + 10] = bb_basis_gradients(lam, lg) @ outward_normal(P, k)
    return rows


def solve_operator(corners) -> tuple[np.ndarray, np.ndarray]:
    """``(S, C)``: ``coefs = S @ dofs`` for this quad, and its diagonal intersection."""
    P = _as_corners(corners)
    check_convex(P)
    return _cached_operator(tuple(map(tuple, P.tolist()))), diagonal_intersection(P)


@lru_cache(maxsize=64)
def _cached_operator(key):
    P = np.array(key)
    C = diagonal_intersection(P)
    A = _junction_rows(P, C)
    _, sv, vt = np.linalg.svd(A)
    rank = int(np.sum(sv > sv[0] * 1e-10))
    if rank != 24:
        raise UnisolvenceError(f"junction conditions have rank {rank}, expected 24")
    N = vt[rank:].T                       # (40, 16) C1 space
    M = _dof_rows(P, C) @ N               # (16, 16)
    if np.linalg.cond(M) > 1e12:
        raise UnisolvenceError("degrees of freedom do not determine the element")
    return N @ np.linalg.inv(M)


def fvs_solve_element(corners, dofs: FvsDofs | np.ndarray) -> FvsElement:
    S, C = solve_operator(corners)
    vec = dofs.as_vector() if isinstance(dofs, FvsDofs) else np.asarray(dofs, dtype=float)
    coefs = np.tensordot(S, vec, axes=(1, 0))
    return FvsElement(_as_corners(corners), C, coefs.reshape((4, 10) + vec.shape[1:]))


def locate(elem: FvsElement, p, tol: float = 1e-12) -> tuple[int, np.ndarray, np.ndarray]:
    """Sub-triangle holding ``p`` with barycentrics and their gradients."""
    for k in range(4):
        lam, lg = elem.barycentric(k, p)
        if lam.min() >= -tol:
            return k, lam, lg
    raise ValueError(f"point {tuple(p)} lies outside the quad")


def patch_eval(elem: FvsElement, k: int, p) -> tuple[np.ndarray, np.ndarray]:
    """Value and gradient of sub-triangle ``k``'s cubic at ``p`` (extrapolates)."""
    lam, lg = elem.barycentric(k, p)
    value, linear = de_casteljau(elem.coefs[k], lam)
    grad = 3 * np.tensordot(lg, linear, axes=(0, 0))
    return value, grad


def patch_value(elem: FvsElement, k: int, p) -> np.ndarray:
    """Value of sub-triangle ``k``'s cubic at ``p`` through the Bernstein basis."""
    lam, _ = elem.barycentric(k, p)
    return bb_basis(lam) @ elem.coefs[k]


def fvs_eval(elem: FvsElement, p) -> tuple[np.ndarray, np.ndarray]:
    k, _, _ = locate(elem, p)
    return patch_eval(elem, k, p)


def element_dofs(elem: FvsElement) -> FvsDofs:
    """Read the 16 degrees of freedom back off an element."""
    P = elem.corners
    values, grads, normals = [], [], []
    for k in range(4):
        v, g = patch_eval(elem, k, P[k])
        values.append(v)
        grads.append(g)
        _, gm = patch_eval(elem, k, (P[k] + P[(k + 1) % 4]) / 2)
        normals.append(np.tensordot(outward_normal(P, k), gm, axes=(0, 0)))
    return FvsDofs(np.array(values), np.array(grads), np.array(normals))


# --- branched FVS surfaces ---------------------------------------------------

# corner k of a cell: offset of its vertex and the cell's position around that vertex
_CORNERS = (((0, 0), 0), ((1, 0), 1), ((1, 1), 2), ((0, 1), 3))


def _edge_key(spec: BranchedCoverSpec, cell, s: int, k: int):
    """Canonical cover edge of side ``k`` and the sign of its outward normal."""
    if k == 0:
        return (spec.step(cell, s, 0, -1), "+y"), -1.0
    if k == 1:
        return ((cell, s), "+x"), 1.0
    if k == 2:
        return ((cell, s), "+y"), 1.0
    return (spec.step(cell, s, -1, 0), "+x"), -1.0


@dataclass
class FvsSurface:
    spec: BranchedCoverSpec
    cfg: EmbeddingConfig
    vertex_dofs: dict
    edge_dofs: dict
    operator: np.ndarray

    def cell_dofs(self, cell, s: int) -> np.ndarray:
        i, j = cell
        vec = []
        for (di, dj), corner in _CORNERS:
            val, grad = self.vertex_dofs[cover_vertex(self.spec, (i + di, j + dj), corner, s)]
            vec += [val, grad[0], grad[1]]
        for k in range(4):
            key, sign = _edge_key(self.spec, cell, s, k)
            vec.append(sign * self.edge_dofs[key])
        return np.array(vec)

    def element(self, cell, s: int) -> FvsElement:
        coefs = np.tensordot(self.operator, self.cell_dofs(cell, s), axes=(1, 0))
        return FvsElement(np.array(UNIT_SQUARE), np.array([0.5, 0.5]), coefs.reshape(4, 10, -1))

    def sampler(self, cell, s, ts):
        elem = self.element(cell, s)
        out = np.empty((len(ts), len(ts), elem.coefs.shape[-1]))
        for a, x in enumerate(ts):
            for b, y in enumerate(ts):
                out[a, b] = fvs_eval(elem, (x, y))[0]
        return out


def fvs_surface(spec: BranchedCoverSpec, cfg: EmbeddingConfig) -> FvsSurface:
    """Global DOF table sampled from the sheet tori."""
    cfg.validate(spec)
    grid, n = spec.grid, spec.sheets
    branch = [r.vertex for r in ramification_points(spec)]
    everyone = lambda u, v: np.mean([torus_embed(grid, t, u, v, cfg) for t in range(n)], axis=0)

    vertex_dofs = {}
    for v in grid.vertices():
        w = blend_weight(nearest_branch_distance(grid, v, branch), cfg.rho)
        orbits: dict = {}
        for s in range(n):
            orbits.setdefault(cover_vertex(spec, v, 0, s), []).append(s)
        du, dv = torus_jacobian(grid, *v, cfg)
        for key, sheets in orbits.items():
            val = np.mean([torus_embed(grid, s, *v, cfg) for s in sheets], axis=0)
            if w > 0:
                val = (1 - w) * val + w * everyone(*v)
            vertex_dofs[key] = (val, np.stack([du, dv]))

    edge_dofs = {}
    for e in cover_edges(spec):
        (i, j), _ = e.a
        mid = (i + 1.0, j + 0.5) if e.direction == "+x" else (i + 0.5, j + 1.0)
        du, dv = torus_jacobian(grid, *mid, cfg)
        edge_dofs[(e.a, e.direction)] = du if e.direction == "+x" else dv

    S, _ = solve_operator(UNIT_SQUARE)
    return FvsSurface(spec, cfg, vertex_dofs, edge_dofs, S)


def build_fvs_surface(spec: BranchedCoverSpec, cfg: EmbeddingConfig, *, fault=None) -> QuadMesh:
    surf = fvs_surface(spec, cfg)
    return weld_cover_mesh(spec, surf.sampler, cfg.k, fault=fault)


def fvs_scan_edges(spec: BranchedCoverSpec) -> list[ScanEdge]:
    """Cover edges (side triangles) plus the four interior sub-edges of each cell."""
    branch = {r.vertex for r in ramification_points(spec)}
    plan = []
    for e in cover_edges(spec):
        ca, sa = e.a
        cb, sb = e.b
        exempt = bool(branch & set(e.vertices))
        if e.direction == "+x":
            plan.append(ScanEdge((ca, sa, 1), (cb, sb, 3), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0), (0.0, 1.0),
                                 label=(e.a, "+x"), exempt=exempt))
        else:
            plan.append(ScanEdge((ca, sa, 2), (cb, sb, 0), (0.0, 1.0), (1.0, 1.0), (0.0, 0.0), (1.0, 0.0),
                                 label=(e.a, "+y"), exempt=exempt))
    for cell, s in spec.cover_cells():
        for k in range(4):
            corner = UNIT_SQUARE[k]
            plan.append(ScanEdge((cell, s, (k - 1) % 4), (cell, s, k), (0.5, 0.5), corner, (0.5, 0.5), corner,
                                 label=((cell, s), f"diag{k}")))
    return plan


def scan_fvs_surface(surf: FvsSurface, *, tol: float = 1e-10, grad_tol: float = 1e-8,
                     samples: int = 5) -> SmoothnessReport:
    cache: dict = {}

    def piece(key, x, y):
        cell, s, k = key
        elem = cache.get((cell, s))
        if elem is None:
            elem = cache[(cell, s)] = surf.element(cell, s)
        return patch_value(elem, k, (x, y))

    return numeric_smoothness_scan(piece, fvs_scan_edges(surf.spec), 1, tol, grad_tol=grad_tol, samples=samples)
