"""Smoothing cofactors, conformality equations and numeric smoothness scans.

Exact machinery works on :class:`~branched_splines.base_splines.Poly2` with
rational coefficients. A spline that is piecewise ``p_i`` is ``C^r`` across a
line ``l`` exactly when ``p_i - p_j`` is divisible by ``l**(r+1)``; around an
interior vertex the quotients (smoothing cofactors) satisfy
``sum l**(r+1) q == 0``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .base_splines import Poly2, monomials
from .exact import bareiss_rank, nullspace


@dataclass(frozen=True)
class LinearForm:
    """The form ``alpha*x + beta*y``, scaled so the first nonzero coefficient is 1."""

    alpha: Fraction
    beta: Fraction

    def __init__(self, alpha, beta):
        alpha, beta = Fraction(alpha), Fraction(beta)
        if alpha == 0 and beta == 0:
            raise ValueError("linear form must be nonzero")
        lead = alpha if alpha != 0 else beta
        object.__setattr__(self, "alpha", alpha / lead)
        object.__setattr__(self, "beta", beta / lead)

    def as_poly(self) -> Poly2:
        return Poly2({(1, 0): self.alpha, (0, 1): self.beta})

    def same_slope(self, other: "LinearForm") -> bool:
        return self.alpha * other.beta == other.alpha * self.beta


@dataclass(frozen=True)
class ConformalityProblem:
    forms: tuple[LinearForm, ...]
    degree: int
    smoothness: int

    def __post_init__(self):
        object.__setattr__(self, "forms", tuple(self.forms))
        if len(self.forms) < 2:
            raise ValueError("need at least two linear forms")
        if self.degree < 0 or self.smoothness < 0:
            raise ValueError("degree and smoothness must be nonnegative")
        for i, a in enumerate(self.forms):
            for b in self.forms[i + 1:]:
                if a.same_slope(b):
                    raise ValueError(f"forms {a} and {b} have the same slope")

    @classmethod
    def default(cls, N: int, n: int, r: int) -> "ConformalityProblem":
        """Slopes ``x + (l-1) y`` for ``l = 1..N``."""
        return cls(tuple(LinearForm(1, l) for l in range(N)), n, r)

    @property
    def cofactor_degree(self) -> int:
        return self.degree - self.smoothness - 1


@dataclass(frozen=True)
class CofactorResult:
    divides: bool
    quotient: Poly2 | None = None


def divide_by_form(p: Poly2, form: LinearForm) -> tuple[Poly2, Poly2]:
    """Exact division ``p = form * q + rem``.

    The remainder is free of the leading variable of ``form`` (``x`` when
    alpha == 1, otherwise ``y``), so ``form`` divides ``p`` iff ``rem == 0``.
    """
    if form.alpha == 0:
        # form == y
        q = {(a, b - 1): v for (a, b), v in p if b > 0}
        rem = {(a, b): v for (a, b), v in p if b == 0}
        return Poly2(q), Poly2(rem)
    # form == x - c with c = -beta*y; synthetic division in x over Q[y]
    c = Poly2({(0, 1): -form.beta})
    top = max((a for (a, _), _v in p), default=0)
    by_x = [Poly2() for _ in range(top + 1)]
    for (a, b), v in p:
        by_x[a] = by_x[a] + Poly2({(0, b): v})
    carry = Poly2()
    q = Poly2()
    for a in range(top, 0, -1):
        carry = by_x[a] + c * carry
        q = q + carry * Poly2({(a - 1, 0): 1})
    rem = by_x[0] + c * carry
    return q, rem


def check_smooth_cofactor(p_i: Poly2, p_j: Poly2, l: LinearForm, r: int) -> CofactorResult:
    if r < 0:
        raise ValueError("smoothness order must be nonnegative")
    q = p_i - p_j
    for _ in range(r + 1):
        q, rem = divide_by_form(q, l)
        if not rem.is_zero():
            return CofactorResult(False)
    return CofactorResult(True, q)


def verify_conformality(forms: Sequence[LinearForm], cofactors: Sequence[Poly2], r: int) -> bool:
    if len(forms) != len(cofactors):
        raise ValueError(f"{len(forms)} forms but {len(cofactors)} cofactors")
    total = Poly2()
    for l, q in zip(forms, cofactors):
        total = total + l.as_poly() ** (r + 1) * q
    return total.is_zero()


@dataclass
class NullityResult:
    problem: ConformalityProblem
    dimension: int
    basis: list[list[Fraction]]
    unknown_monomials: list[tuple[int, int]]

    def cofactors(self, vector: Sequence[Fraction]) -> list[Poly2]:
        """Split a solution vector into one cofactor per form."""
        k = len(self.unknown_monomials)
        return [
            Poly2(dict(zip(self.unknown_monomials, vector[l * k:(l + 1) * k])))
            for l in range(len(self.problem.forms))
        ]


def conformality_system(prob: ConformalityProblem):
    """Coefficient matrix of ``sum l**(r+1) q_l`` in the monomials of degree ``<= n``."""
    m = prob.cofactor_degree
    unknowns = monomials(m) if m >= 0 else []
    rows_idx = {mono: i for i, mono in enumerate(monomials(prob.degree))}
    cols = []
    for form in prob.forms:
        power = form.as_poly() ** (prob.smoothness + 1)
        for a, b in unknowns:
            col = [Fraction(0)] * len(rows_idx)
            for mono, v in power * Poly2({(a, b): 1}):
                col[rows_idx[mono]] = v
            cols.append(col)
    rows = [list(r) for r in zip(*cols)] if cols else []
    return rows, unknowns


def conformality_nullity(prob: ConformalityProblem) -> NullityResult:
    rows, unknowns = conformality_system(prob)
    n_cols = len(unknowns) * len(prob.forms)
    if n_cols == 0:
        return NullityResult(prob, 0, [], unknowns)
    basis = nullspace(rows, n_cols)
    rank = bareiss_rank(rows)
    if n_cols - rank != len(basis):
        raise ArithmeticError("rank and null-space basis disagree")
    return NullityResult(prob, len(basis), basis, unknowns)


def conformality_dimension_formula(N: int, n: int, r: int, variant: str = "A") -> int:
    """Closed-form conformality dimension.

    ``variant="A"`` uses ``floor((r+1)/(N-1))`` in both brackets;
    ``variant="B"`` takes ``floor((r+1)/(N+1))`` in the second factor.
    Half-integral values are truncated toward zero.
    """
    if N < 2 or n < 0 or r < 0:
        raise ValueError(f"invalid (N, n, r) = {(N, n, r)}")
    d = floor((r + 1) / (N - 1))
    if variant == "A":
        d2 = d
    elif variant == "B":
        d2 = floor((r + 1) / (N + 1))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    pre = max(n - r - d, 0)
    val = Fraction(pre * ((N - 1) * n - (N + 1) * r + (N - 3) + (N - 1) * d2), 2)
    return max(int(val), 0)


@dataclass(frozen=True)
class SweepRow:
    N: int
    n: int
    r: int
    oracle_dim: int
    formula_A: int
    formula_B: int

    @property
    def agree_A(self) -> bool:
        return self.oracle_dim == self.formula_A

    @property
    def agree_B(self) -> bool:
        return self.oracle_dim == self.formula_B


SWEEP_COLUMNS = ["N", "n", "r", "oracle_dim", "formula_A", "formula_B", "agree_A", "agree_B"]


def conformality_sweep(Ns: Iterable[int], ns: Iterable[int], rs: Iterable[int]) -> list[SweepRow]:
    ns, rs = list(ns), list(rs)
    rows = []
    for N in Ns:
        for n in ns:
            for r in rs:
                prob = ConformalityProblem.default(N, n, r)
                rows.append(SweepRow(
                    N, n, r,
                    conformality_nullity(prob).dimension,
                    conformality_dimension_formula(N, n, r, "A"),
                    conformality_dimension_formula(N, n, r, "B"),
                ))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([row.N, row.n, row.r, row.oracle_dim, row.formula_A, row.formula_B,
                    int(row.agree_A), int(row.agree_B)])
    return buf.getvalue()


def agreement_rates(rows: Sequence[SweepRow]) -> dict[str, float]:
    if not rows:
        return {"A": float("nan"), "B": float("nan")}
    return {
        "A": sum(r.agree_A for r in rows) / len(rows),
        "B": sum(r.agree_B for r in rows) / len(rows),
    }


# --- numeric scans -----------------------------------------------------------

Piece = Callable[[Hashable, float, float], "np.ndarray | float"]


@dataclass(frozen=True)
class ScanEdge:
    """An edge seen from two polynomial pieces.

    The edge point at parameter ``t`` is ``a0 + t*(a1 - a0)`` in the local
    coordinates of piece ``a`` and ``b0 + t*(b1 - b0)`` in those of piece
    ``b``. Both local frames must be translates of the same base chart.
    """

    a: Hashable
    b: Hashable
    a0: tuple[float, float]
    a1: tuple[float, float]
    b0: tuple[float, float]
    b1: tuple[float, float]
    label: Hashable = None
    exempt: bool = False


@dataclass
class EdgeScan:
    edge: ScanEdge
    value_gap: float
    gradient_gap: float


@dataclass
class SmoothnessReport:
    order: int
    tol: float
    grad_tol: float
    edges: list[EdgeScan] = field(default_factory=list)

    def _gaps(self, exempt: bool):
        return [e for e in self.edges if e.edge.exempt == exempt]

    @property
    def max_value_gap(self) -> float:
        return max((e.value_gap for e in self._gaps(False)), default=0.0)

    @property
    def max_gradient_gap(self) -> float:
        return max((e.gradient_gap for e in self._gaps(False)), default=0.0)

    @property
    def exempt_max_value_gap(self) -> float:
        return max((e.value_gap for e in self._gaps(True)), default=0.0)

    @property
    def exempt_max_gradient_gap(self) -> float:
        return max((e.gradient_gap for e in self._gaps(True)), default=0.0)

    @property
    def failures(self) -> list[EdgeScan]:
        bad = []
        for e in self._gaps(False):
            if e.value_gap > self.tol or (self.order >= 1 and e.gradient_gap > self.grad_tol):
                bad.append(e)
        return bad

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        return {
            "order": self.order,
            "edges_checked": len(self._gaps(False)),
            "edges_exempt": len(self._gaps(True)),
            "max_value_gap": self.max_value_gap,
            "max_gradient_gap": self.max_gradient_gap if self.order >= 1 else None,
            "exempt_max_value_gap": self.exempt_max_value_gap,
            "exempt_max_gradient_gap": self.exempt_max_gradient_gap if self.order >= 1 else None,
            "value_tol": self.tol,
            "gradient_tol": self.grad_tol if self.order >= 1 else None,
            "passed": self.passed,
        }


def _central_gradient(piece: Piece, key, x: float, y: float, h: float) -> np.ndarray:
    gx = (np.asarray(piece(key, x + h, y)) - np.asarray(piece(key, x - h, y))) / (2 * h)
    gy = (np.asarray(piece(key, x, y + h)) - np.asarray(piece(key, x, y - h))) / (2 * h)
    return np.stack([gx, gy])


def scan_params(samples: int) -> list[float]:
    return [(s + 1) / (samples + 1) for s in range(samples)]


def numeric_smoothness_scan(
    piece: Piece,
    edges: Iterable[ScanEdge],
    order: int,
    tol: float,
    *,
    grad_tol: float | None = None,
    samples: int = 5,
    params: Sequence[float] | None = None,
    h: float = 1e-5,
) -> SmoothnessReport:
    """Compare two-sided values (and gradients for ``order >= 1``) along edges.

    ``piece(key, x, y)`` evaluates the polynomial piece ``key`` at local
    coordinates, extrapolating past its cell when asked; gradients are
    central differences with step ``h``.
    """
    ts = list(params) if params is not None else scan_params(samples)
    for t in ts:
        if not 0.0 < t < 1.0:
            raise ValueError(f"sample parameter {t} is not interior to the edge")
    report = SmoothnessReport(order, tol, tol if grad_tol is None else grad_tol)
    for e in edges:
        vgap = ggap = 0.0
        for t in ts:
            ax = e.a0[0] + t * (e.a1[0] - e.a0[0])
            ay = e.a0[1] + t * (e.a1[1] - e.a0[1])
            bx = e.b0[0] + t * (e.b1[0] - e.b0[0])
            by = e.b0[1] + t * (e.b1[1] - e.b0[1])
            va = np.asarray(piece(e.a, ax, ay), dtype=float)
            vb = np.asarray(piece(e.b, bx, by), dtype=float)
            vgap = max(vgap, float(np.max(np.abs(va - vb))))
            if order >= 1:
                ga = _central_gradient(piece, e.a, ax, ay, h)
                gb = _central_gradient(piece, e.b, bx, by, h)
                ggap = max(ggap, float(np.max(np.abs(ga - gb))))
        report.edges.append(EdgeScan(e, vgap, ggap))
    return report
