"""Embedding branched splines in space: control nets, tessellation, meshes, OBJ."""

from __future__ import annotations

import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .analyzer import ScanEdge, SmoothnessReport, numeric_smoothness_scan
from .base_splines import TorusGrid
from .branched_basis import IRREGULAR, BranchedBasis, cell_samples, eval_piece
from .cover import BranchedCoverSpec, cover_edges, cover_vertex, ramification_points

WELD_TOL = 1e-9


class WeldError(RuntimeError):
    """Boundary samples of adjacent cover cells disagree."""


@dataclass(frozen=True)
class EmbeddingConfig:
    R: float = 4.0
    r_minor: float = 1.0
    offsets: tuple[float, ...] | None = None
    rho: float = 2.0
    k: int = 2

    def __post_init__(self):
        if self.offsets is not None:
            object.__setattr__(self, "offsets", tuple(float(o) for o in self.offsets))
        if self.rho < 0:
            raise ValueError("blend radius must be nonnegative")
        if self.k < 1:
            raise ValueError("tessellation density must be >= 1")

    def sheet_offsets(self, n: int) -> tuple[float, ...]:
        """z-offsets of the sheet tori (default: stacked ``2.5 * r_minor`` apart)."""
        if self.offsets is None:
            return tuple(s * 2.5 * self.r_minor for s in range(n))
        if len(self.offsets) != n:
            raise ValueError(f"{len(self.offsets)} offsets for {n} sheets")
        return self.offsets

    def validate(self, spec: BranchedCoverSpec) -> None:
        offs = self.sheet_offsets(spec.sheets)
        if len(set(offs)) != len(offs):
            raise ValueError("sheet offsets must be pairwise distinct")
        pts = [r.vertex for r in ramification_points(spec)]
        for i, p in enumerate(pts):
            for q in pts[i + 1:]:
                if spec.grid.torus_distance(p, q) <= self.rho:
                    raise ValueError(f"blend radius {self.rho} reaches from {p} to {q}")


def torus_embed(grid: TorusGrid, sheet: int, u, v, cfg: EmbeddingConfig) -> np.ndarray:
    """Point of sheet ``sheet``'s torus of revolution over base point ``(u, v)``.

    Accepts arrays for ``u`` and ``v``; the trailing axis holds xyz.
    """
    off = cfg.offsets[sheet] if cfg.offsets is not None else sheet * 2.5 * cfg.r_minor
    theta = 2 * np.pi * np.asarray(u, dtype=float) / grid.W
    phi = 2 * np.pi * np.asarray(v, dtype=float) / grid.H
    rad = cfg.R + cfg.r_minor * np.cos(phi)
    return np.stack([rad * np.cos(theta), rad * np.sin(theta), cfg.r_minor * np.sin(phi) + off], axis=-1)


def torus_jacobian(grid: TorusGrid, u, v, cfg: EmbeddingConfig) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of :func:`torus_embed` in ``u`` and ``v`` (sheet independent)."""
    tu, tv = 2 * np.pi / grid.W, 2 * np.pi / grid.H
    theta, phi = tu * float(u), tv * float(v)
    rad = cfg.R + cfg.r_minor * np.cos(phi)
    du = tu * np.array([-rad * np.sin(theta), rad * np.cos(theta), 0.0])
    dv = tv * cfg.r_minor * np.array([-np.sin(phi) * np.cos(theta), -np.sin(phi) * np.sin(theta), np.cos(phi)])
    return du, dv


def blend_weight(dist: float, rho: float) -> float:
    if rho <= 0 or dist >= rho:
        return 0.0
    return 1.0 - dist / rho


def nearest_branch_distance(grid: TorusGrid, p, branch: Sequence) -> float:
    return min((grid.torus_distance(p, b) for b in branch), default=float("inf"))


@dataclass
class ControlNet:
    points: np.ndarray
    irregular: list[int] = field(default_factory=list)
    blended: int = 0


def sample_control_net(spec: BranchedCoverSpec, basis: BranchedBasis, cfg: EmbeddingConfig) -> ControlNet:
    cfg.validate(spec)
    grid, n = spec.grid, spec.sheets
    branch = [r.vertex for r in ramification_points(spec)]
    pts = np.empty((len(basis), 3))
    net = ControlNet(pts)
    for idx, comp in enumerate(basis.components):
        gx, gy = comp.base.greville
        sheets = comp.sheets_at(comp.base.greville_cell)
        own = np.mean([torus_embed(grid, s, gx, gy, cfg) for s in sheets], axis=0)
        if comp.kind == IRREGULAR:
            net.irregular.append(idx)
        w = blend_weight(nearest_branch_distance(grid, (gx, gy), branch), cfg.rho)
        if w > 0:
            everyone = np.mean([torus_embed(grid, s, gx, gy, cfg) for s in range(n)], axis=0)
            own = (1 - w) * own + w * everyone
            net.blended += 1
        pts[idx] = own
    return net


@dataclass
class QuadMesh:
    positions: np.ndarray
    faces: np.ndarray
    face_sheets: np.ndarray | None = None
    weld_gap: float = 0.0


@dataclass(frozen=True)
class MeshReport:
    V: int
    E: int
    F: int
    chi: int
    genus: int | None
    closed: bool
    oriented: bool
    manifold: bool

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("V", "E", "F", "chi", "genus", "closed", "oriented", "manifold")}


Sampler = Callable[[tuple[int, int], int, Sequence[float]], np.ndarray]


def _sample_key(spec: BranchedCoverSpec, cell, s: int, a: int, b: int, k: int):
    i, j = cell
    if a in (0, k) and b in (0, k):
        corner = {(0, 0): 0, (k, 0): 1, (k, k): 2, (0, k): 3}[(a, b)]
        v = (i + a // k, j + b // k)
        return ("v",) + cover_vertex(spec, v, corner, s)
    if a in (0, k):
        left = (cell, s) if a == k else spec.step(cell, s, -1, 0)
        return ("ex", left, b)
    if b in (0, k):
        below = (cell, s) if b == k else spec.step(cell, s, 0, -1)
        return ("ey", below, a)
    return ("f", cell, s, a, b)


def weld_cover_mesh(spec: BranchedCoverSpec, sampler: Sampler, k: int, *, fault=None) -> QuadMesh:
    """Sample every cover cell on a ``(k+1)**2`` grid and weld by combinatorial identity.

    ``fault``, when given as ``((cell, sheet), (a, b))``, displaces that one
    sample before welding; it exists to exercise the weld check.
    """
    ts = [a / k for a in range(k + 1)]
    index: dict = {}
    positions: list[np.ndarray] = []
    faces: list[tuple[int, int, int, int]] = []
    sheets: list[int] = []
    gap = 0.0
    for cell, s in spec.cover_cells():
        samples = np.asarray(sampler(cell, s, ts), dtype=float)
        if fault is not None and fault[0] == (cell, s):
            samples = samples.copy()
            samples[fault[1]] += 1.0
        ids = np.empty((k + 1, k + 1), dtype=int)
        for a in range(k + 1):
            for b in range(k + 1):
                key = _sample_key(spec, cell, s, a, b, k)
                vid = index.get(key)
                if vid is None:
                    vid = index[key] = len(positions)
                    positions.append(samples[a, b])
                else:
                    gap = max(gap, float(np.max(np.abs(positions[vid] - samples[a, b]))))
                ids[a, b] = vid
        for a in range(k):
            for b in range(k):
                faces.append((ids[a, b], ids[a + 1, b], ids[a + 1, b + 1], ids[a, b + 1]))
                sheets.append(s)
    if gap > WELD_TOL:
        raise WeldError(f"adjacent boundary samples differ by {gap:.3e} (tolerance {WELD_TOL:g})")
    return QuadMesh(np.array(positions), np.array(faces, dtype=int).reshape(-1, 4),
                    np.array(sheets, dtype=int), gap)


def tessellate(spec: BranchedCoverSpec, basis: BranchedBasis, net: ControlNet | np.ndarray,
               cfg: EmbeddingConfig, *, fault=None) -> QuadMesh:
    coefs = net.points if isinstance(net, ControlNet) else np.asarray(net, dtype=float)

    def sampler(cell, s, ts):
        return cell_samples(basis, coefs, cell, s, ts)

    return weld_cover_mesh(spec, sampler, cfg.k, fault=fault)


def _directed_edges(faces: np.ndarray) -> Iterable[tuple[int, int]]:
    for f in faces:
        m = len(f)
        for t in range(m):
            yield int(f[t]), int(f[(t + 1) % m])


def _vertex_links_ok(faces: np.ndarray, n_vertices: int) -> bool:
    links: list[dict[int, int]] = [dict() for _ in range(n_vertices)]
    for f in faces:
        m = len(f)
        for t in range(m):
            prev, here, nxt = int(f[t - 1]), int(f[t]), int(f[(t + 1) % m])
            if prev in links[here]:
                return False
            links[here][prev] = nxt
    for link in links:
        if not link:
            return False
        start = next(iter(link))
        cur, steps = start, 0
        while True:
            cur = link.get(cur)
            steps += 1
            if cur is None or steps > len(link):
                return False
            if cur == start:
                break
        if steps != len(link):
            return False
    return True


def mesh_report(m: QuadMesh) -> MeshReport:
    faces = np.asarray(m.faces, dtype=int)
    directed = Counter(_directed_edges(faces))
    undirected = Counter()
    for (a, b), c in directed.items():
        undirected[(min(a, b), max(a, b))] += c
    V, E, F = len(m.positions), len(undirected), len(faces)
    closed = all(c == 2 for c in undirected.values())
    oriented = all(c == 1 for c in directed.values())
    manifold = closed and oriented and _vertex_links_ok(faces, V)
    chi = V - E + F
    genus = 1 - chi // 2 if closed and oriented and chi % 2 == 0 else None
    return MeshReport(V, E, F, chi, genus, closed, oriented, manifold)


def obj_text(m: QuadMesh, groups: bool = True) -> str:
    out = io.StringIO()
    for x, y, z in m.positions:
        out.write(f"v {x:.9g} {y:.9g} {z:.9g}\n")
    current = None
    for fi, f in enumerate(m.faces):
        if groups and m.face_sheets is not None:
            s = int(m.face_sheets[fi])
            if s != current:
                out.write(f"g sheet_{s}\n")
                current = s
        out.write("f " + " ".join(str(int(v) + 1) for v in f) + "\n")
    return out.getvalue()


def export_obj(m: QuadMesh, sink, groups: bool = True) -> None:
    """Write ASCII OBJ to a binary stream or a path."""
    data = obj_text(m, groups).encode("ascii")
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)


def read_obj(source) -> QuadMesh:
    """Minimal OBJ reader (``v`` and ``f`` records only)."""
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, "rb") as fh:
            source = fh.read()
    if isinstance(source, bytes):
        source = source.decode("ascii")
    pos, faces = [], []
    for line in source.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            pos.append([float(t) for t in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(t.split("/")[0]) - 1 for t in parts[1:]])
    return QuadMesh(np.array(pos, dtype=float).reshape(-1, 3), np.array(faces, dtype=int).reshape(-1, 4))


def bspline_scan_edges(spec: BranchedCoverSpec) -> list[ScanEdge]:
    """Scan plan over all cover edges; edges touching a branch vertex are exempt."""
    branch = {r.vertex for r in ramification_points(spec)}
    plan = []
    for e in cover_edges(spec):
        if e.direction == "+x":
            a0, a1, b0, b1 = (1.0, 0.0), (1.0, 1.0), (0.0, 0.0), (0.0, 1.0)
        else:
            a0, a1, b0, b1 = (0.0, 1.0), (1.0, 1.0), (0.0, 0.0), (1.0, 0.0)
        plan.append(ScanEdge(e.a, e.b, a0, a1, b0, b1, label=(e.a, e.direction),
                             exempt=bool(branch & set(e.vertices))))
    return plan


def scan_branched_spline(basis: BranchedBasis, coefs, *, tol: float = 1e-10, grad_tol: float = 1e-8,
                         order: int | None = None, samples: int = 5) -> SmoothnessReport:
    """Two-sided value/gradient scan of a branched spline across every cover edge."""
    coefs = coefs.points if isinstance(coefs, ControlNet) else np.asarray(coefs, dtype=float)
    if order is None:
        order = basis.degree - 1
    order = max(order, 0)

    def piece(key, x, y):
        cell, s = key
        return eval_piece(basis, coefs, cell, s, x, y)

    return numeric_smoothness_scan(piece, bspline_scan_edges(basis.spec), order, tol,
                                   grad_tol=grad_tol, samples=samples)
