"""Real-valued quantifications of lattice elements.

The sum rule is checked here and propagated from join-irreducibles. The
module also classifies fidelity (valuation / co-valuation) and regraduates an
Abelian combination rule to ordinary addition. Lattice products get the
direct product rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number, Rational
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainError,
    Inconsistent,
    MissingSeed,
    NonFiniteInput,
    ShapeMismatch,
    UnknownElement,
)
from .lattice import Lattice, join_irreducibles, product
from .poset import Ref


def _is_exact(v) -> bool:
    return isinstance(v, Rational) and not isinstance(v, bool)


def as_array(values: Sequence) -> np.ndarray:
    """int64 when every value is an int, object (Fractions) when all are rational, else float64."""
    if all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in values):
        return np.array(values, dtype=np.int64)
    if all(_is_exact(v) for v in values):
        return np.array([Fraction(v) for v in values], dtype=object)
    return np.array([float(v) for v in values], dtype=np.float64)


class Quantification:
    """One real number per lattice element, indexed like the lattice."""

    def __init__(self, lattice: Lattice, values: Sequence):
        if len(values) != lattice.n:
            raise ShapeMismatch(f"{len(values)} values for a lattice of {lattice.n} elements")
        self.lattice = lattice
        self.values = tuple(v.item() if isinstance(v, np.generic) else v for v in values)

    @classmethod
    def from_mapping(cls, lattice: Lattice, mapping: Mapping[Ref, Number]) -> "Quantification":
        vals: list = [None] * lattice.n
        for ref, v in mapping.items():
            vals[lattice.index(ref)] = v
        missing = [lattice.label(i) for i, v in enumerate(vals) if v is None]
        if missing:
            raise MissingSeed(f"no value for {missing}")
        return cls(lattice, vals)

    def __getitem__(self, ref: Ref):
        return self.values[self.lattice.index(ref)]

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"Quantification({self.as_dict()!r})"

    @property
    def exact(self) -> bool:
        return all(_is_exact(v) for v in self.values)

    def array(self) -> np.ndarray:
        return as_array(self.values)

    def as_dict(self) -> dict[str, Number]:
        return dict(zip(self.lattice.labels, self.values))

    def scaled(self, alpha) -> "Quantification":
        return Quantification(self.lattice, [alpha * v for v in self.values])


@dataclass
class ConsistencyReport:
    """Outcome of a residual sweep.

    ``cases`` holds one row of element indices per checked tuple, aligned with
    ``residuals``; ``worst`` is the row with the largest absolute residual.
    """

    check: str
    passed: bool
    max_residual: float
    tol: float
    worst: tuple[int, ...] | None = None
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    cases: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64), repr=False)
    checked: int = 0
    parts: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_residuals(cls, check: str, residuals: np.ndarray, cases: np.ndarray, tol: float) -> "ConsistencyReport":
        residuals = np.asarray(residuals)
        cases = np.asarray(cases, dtype=np.int64)
        if residuals.size == 0:
            return cls(check, True, 0.0, tol, None, residuals, cases, 0)
        mag = np.abs(residuals)
        k = int(np.argmax(mag))
        worst_val = mag[k]
        max_res = float(worst_val)
        passed = bool(worst_val <= tol)
        worst = tuple(int(v) for v in cases[k])
        return cls(check, passed, max_res, tol, worst, residuals, cases, int(residuals.size))

    def worst_residual(self):
        if self.worst is None:
            return 0
        k = int(np.argmax(np.abs(self.residuals)))
        r = self.residuals[k]
        return r.item() if isinstance(r, np.generic) else r


def default_tol(values) -> float:
    arr = np.asarray([float(v) for v in values]) if len(values) else np.zeros(1)
    return 1e-9 * (1.0 + float(np.max(np.abs(arr))))


# -- sum rule -----------------------------------------------------------------

def sum_rule(x, y, w):
    """Value of ``x v y`` given the values of ``x``, ``y`` and ``x ^ y``."""
    for v in (x, y, w):
        if not math.isfinite(v):
            raise NonFiniteInput(f"non-finite input {v!r}")
    return x + y - w


def check_consistency(l: Lattice, q: Quantification, tol: float = 1e-9) -> ConsistencyReport:
    """Sum-rule residual ``q(x v y) - q(x) - q(y) + q(x ^ y)`` over every unordered pair."""
    l.require_lattice()
    Q = q.array()
    J = np.asarray(l.join_table)
    M = np.asarray(l.meet_table)
    i, j = np.triu_indices(l.n, k=1)
    r = Q[J[i, j]] - Q[i] - Q[j] + Q[M[i, j]]
    return ConsistencyReport.from_residuals("sum-rule", r, np.stack([i, j], axis=1), tol)


def propagate(l: Lattice, seed: Mapping[Ref, Number], bottom_value=0, tol: float | None = None) -> Quantification:
    """Extend values on the join-irreducibles to the whole lattice with the sum rule.

    Elements are visited in a linear extension; a reducible element ``x`` with
    lower covers ``u, v`` gets ``q(u) + q(v) - q(u ^ v)``. The result is then
    checked on all pairs, and :class:`Inconsistent` is raised with the worst
    pair if any residual exceeds ``tol`` (default ``1e-9 * (1 + max|q|)``).
    """
    l.require_lattice()
    irr = set(join_irreducibles(l))
    given = {l.index(k): v for k, v in seed.items()}
    extra = [l.label(i) for i in given if i not in irr]
    if extra:
        raise UnknownElement(f"seed values given for elements that are not join-irreducible: {extra}")
    missing = [l.label(i) for i in sorted(irr) if i not in given]
    if missing:
        raise MissingSeed(f"join-irreducibles without a seed value: {missing}")
    bot = l.bottom
    vals: list = [None] * l.n
    M = l.meet_table
    for x in l.poset.linear_extension:
        if x == bot:
            vals[x] = bottom_value
        elif x in irr:
            vals[x] = given[x]
        else:
            u, v = l.poset.lower_covers[x][:2]
            vals[x] = sum_rule(vals[u], vals[v], vals[int(M[u, v])])
    q = Quantification(l, vals)
    if tol is None:
        tol = 0.0 if q.exact else default_tol(vals)
    report = check_consistency(l, q, tol)
    if not report.passed:
        a, b = report.worst
        raise Inconsistent((a, b), report.worst_residual(), labels=(l.label(a), l.label(b)))
    return q


# -- fidelity -------------------------------------------------------------------

VALUATION = "valuation"
CO_VALUATION = "co-valuation"
NEITHER = "neither"


@dataclass(frozen=True)
class Fidelity:
    kind: str
    is_valuation: bool
    is_co_valuation: bool

    @property
    def note(self) -> str:
        if self.is_valuation and self.is_co_valuation:
            return "constant on every comparable pair: both a valuation and a co-valuation"
        return ""


def fidelity_class(l: Lattice, q: Quantification) -> Fidelity:
    Q = np.array([float(v) for v in q.values])
    order = l.poset.order
    diff = Q[None, :] - Q[:, None]  # q(y) - q(x) at [x, y]
    val = bool(np.all(diff[order] >= 0))
    coval = bool(np.all(diff[order] <= 0))
    kind = VALUATION if val else CO_VALUATION if coval else NEITHER
    return Fidelity(kind, val, coval)


# -- scale functions and regraduation --------------------------------------------

@dataclass(frozen=True)
class ScaleFunction:
    """Strictly monotonic invertible real function ``f``.

    Kinds: ``identity``, ``log`` (natural log), ``exp``, ``affine``
    (``alpha * x + beta``, alpha != 0) and ``table`` (piecewise-linear through
    strictly increasing ``xs`` with strictly monotone ``ys``).
    """

    kind: str
    alpha: float = 1.0
    beta: float = 0.0
    xs: tuple[float, ...] = ()
    ys: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("identity", "log", "exp", "affine", "table"):
            raise DomainError(f"unknown scale kind {self.kind!r}")
        if self.kind == "affine" and self.alpha == 0:
            raise DomainError("affine scale needs alpha != 0")
        if self.kind == "table":
            xs, ys = np.asarray(self.xs, float), np.asarray(self.ys, float)
            if len(xs) < 2 or len(xs) != len(ys):
                raise DomainError("table scale needs at least two (x, y) samples")
            dx, dy = np.diff(xs), np.diff(ys)
            if not np.all(dx > 0):
                raise DomainError("table scale xs must be strictly increasing")
            if not (np.all(dy > 0) or np.all(dy < 0)):
                raise DomainError("table scale ys must be strictly monotone")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def log(cls):
        return cls("log")

    @classmethod
    def exp(cls):
        return cls("exp")

    @classmethod
    def affine(cls, alpha, beta=0.0):
        return cls("affine", alpha=alpha, beta=beta)

    @classmethod
    def table(cls, samples: Sequence[tuple[float, float]]):
        xs, ys = zip(*samples)
        return cls("table", xs=tuple(map(float, xs)), ys=tuple(map(float, ys)))

    @classmethod
    def parse(cls, text: str) -> "ScaleFunction":
        """Parse ``identity``, ``log``, ``exp`` or ``affine:ALPHA,BETA``."""
        name, _, args = text.partition(":")
        name = name.strip().lower()
        if name == "affine":
            parts = [float(a) for a in args.split(",") if a.strip()] if args else []
            if not 1 <= len(parts) <= 2:
                raise DomainError(f"affine scale needs 'affine:ALPHA[,BETA]', got {text!r}")
            return cls.affine(*parts)
        if name in ("identity", "log", "exp"):
            return cls(name)
        raise DomainError(f"unknown scale {text!r}")

    def _hull(self, pts):
        return min(pts), max(pts)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            out = x
        elif self.kind == "exp":
            out = np.exp(x)
        elif self.kind == "log":
            if np.any(x <= 0):
                raise DomainError(f"log scale undefined at {x}")
            out = np.log(x)
        elif self.kind == "affine":
            out = self.alpha * x + self.beta
        else:
            lo, hi = self._hull(self.xs)
            if np.any((x < lo) | (x > hi)):
                raise DomainError(f"{x} outside table domain [{lo}, {hi}]")
            out = np.interp(x, self.xs, self.ys)
        return out.item() if out.ndim == 0 else out

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "identity":
            out = y
        elif self.kind == "exp":
            if np.any(y <= 0):
                raise DomainError(f"{y} outside the range (0, inf) of exp")
            out = np.log(y)
        elif self.kind == "log":
            out = np.exp(y)
        elif self.kind == "affine":
            out = (y - self.beta) / self.alpha
        else:
            lo, hi = self._hull(self.ys)
            if np.any((y < lo) | (y > hi)):
                raise DomainError(f"{y} outside table range [{lo}, {hi}]")
            if self.ys[0] < self.ys[-1]:
                out = np.interp(y, self.ys, self.xs)
            else:
                out = np.interp(y, self.ys[::-1], self.xs[::-1])
        return out.item() if out.ndim == 0 else out


def oplus(f: ScaleFunction, x, y):
    """Combine two values through ``f(f^-1(x) + f^-1(y))``."""
    return f.forward(f.inverse(x) + f.inverse(y))


def regraduate(q: Quantification, f: ScaleFunction) -> Quantification:
    """Map every value through ``f^-1`` so that ``oplus(f, ...)`` becomes ordinary addition."""
    if f.kind == "identity":
        return Quantification(q.lattice, q.values)
    if f.kind == "affine" and q.exact and _is_exact(f.alpha) and _is_exact(f.beta):
        a, b = Fraction(f.alpha), Fraction(f.beta)
        vals = [(Fraction(v) - b) / a for v in q.values]
        return Quantification(q.lattice, [int(v) if v.denominator == 1 else v for v in vals])
    return Quantification(q.lattice, [float(f.inverse(float(v))) for v in q.values])


# -- finite operator tables -----------------------------------------------------------

def _close(a, b, tol) -> bool:
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


@dataclass
class FiniteOpTable:
    """A binary operator tabulated on a finite grid.

    ``op``, when present, lets associativity be checked through intermediate
    results that leave the grid; a bare table can only check triples whose
    intermediate results land back on the grid.
    """

    grid: tuple
    table: np.ndarray
    op: Callable | None = None

    def __post_init__(self):
        self.grid = tuple(self.grid)
        self.table = np.asarray(self.table, dtype=float)
        k = len(self.grid)
        if self.table.shape != (k, k):
            raise ShapeMismatch(f"table shape {self.table.shape} for a grid of {k} points")

    @classmethod
    def from_function(cls, grid: Sequence, op: Callable) -> "FiniteOpTable":
        table = [[op(a, b) for b in grid] for a in grid]
        return cls(tuple(grid), np.array(table, dtype=float), op)

    def lookup(self, x, tol=1e-9) -> int | None:
        for k, g in enumerate(self.grid):
            if _close(g, x, tol):
                return k
        return None

    def apply(self, a, b, tol=1e-9):
        if self.op is not None:
            return self.op(a, b)
        i, j = self.lookup(a, tol), self.lookup(b, tol)
        if i is None or j is None:
            return None
        return float(self.table[i, j])


@dataclass
class AbelianReport:
    commutative: bool
    associative: bool
    identity: float | None
    inverses: bool
    commutative_witness: tuple | None = None
    associative_witness: tuple | None = None
    associativity_residual: float = 0.0
    inverse_witness: float | None = None
    missing_inverses: list = field(default_factory=list)
    unchecked_triples: int = 0

    @property
    def abelian(self) -> bool:
        return self.commutative and self.associative and self.identity is not None and self.inverses


def check_abelian(t: FiniteOpTable, tol: float = 1e-9) -> AbelianReport:
    """Exhaustive commutativity/associativity check plus identity and inverse search on the grid.

    When inverses are missing, ``inverse_witness`` is the grid point farthest
    from the identity that has none; all of them are in ``missing_inverses``.
    """
    g = t.grid
    k = len(g)
    comm_w = None
    for i in range(k):
        for j in range(i + 1, k):
            if not _close(t.table[i, j], t.table[j, i], tol):
                comm_w = (g[i], g[j])
                break
        if comm_w:
            break

    assoc_w = None
    worst = 0.0
    unchecked = 0
    for a in g:
        for b in g:
            ab = t.apply(a, b, tol)
            for c in g:
                bc = t.apply(b, c, tol)
                left = None if ab is None else t.apply(ab, c, tol)
                right = None if bc is None else t.apply(a, bc, tol)
                if left is None or right is None:
                    unchecked += 1
                    continue
                rel = abs(left - right) / (1.0 + max(abs(left), abs(right)))
                if rel > worst:
                    worst = rel
                if rel > tol and assoc_w is None:
                    assoc_w = (a, b, c)

    identity = None
    for ei, e in enumerate(g):
        if all(_close(t.table[ei, j], g[j], tol) and _close(t.table[j, ei], g[j], tol) for j in range(k)):
            identity = e
            break

    missing: list = []
    if identity is not None:
        for i, a in enumerate(g):
            if not any(_close(t.table[i, j], identity, tol) for j in range(k)):
                missing.append(a)
    inv_ok = identity is not None and not missing
    witness = max(missing, key=lambda a: (abs(a - identity), a)) if missing else None
    return AbelianReport(
        commutative=comm_w is None,
        associative=assoc_w is None,
        identity=identity,
        inverses=inv_ok,
        commutative_witness=comm_w,
        associative_witness=assoc_w,
        associativity_residual=worst,
        inverse_witness=witness,
        missing_inverses=missing,
        unchecked_triples=unchecked,
    )


# -- lattice products ----------------------------------------------------------------

def product_quantify(qA: Quantification, qB: Quantification, prod: Lattice | None = None) -> Quantification:
    """Direct product rule: ``q((a, b)) = q(a) * q(b)`` on ``product(A, B)``."""
    A, B = qA.lattice, qB.lattice
    if prod is None:
        prod = product(A, B)
    elif prod.n != A.n * B.n or prod.labels != tuple(f"({a},{b})" for a in A.labels for b in B.labels):
        raise ShapeMismatch("product lattice does not match the factor lattices")
    vals = [va * vb for va in qA.values for vb in qB.values]
    return Quantification(prod, vals)


def check_product_distributivity(qA: Quantification, qB: Quantification, qP: Quantification | None = None,
                                 tol: float = 0.0) -> ConsistencyReport:
    """Residual ``q((a1 v a2, b)) - q((a1, b)) - q((a2, b))`` for disjoint ``a1, a2``.

    Only pairs over which ``qA`` is itself additive are included.
    """
    A, B = qA.lattice, qB.lattice
    if qP is None:
        qP = product_quantify(qA, qB)
    bot = A.bottom
    QA = qA.values
    QP = qP.values
    res, cases = [], []
    nb = B.n
    for a1 in range(A.n):
        for a2 in range(a1 + 1, A.n):
            if int(A.meet_table[a1, a2]) != bot:
                continue
            j = int(A.join_table[a1, a2])
            if not _close(QA[j], QA[a1] + QA[a2], 1e-12):
                continue
            for b in range(nb):
                res.append(QP[j * nb + b] - QP[a1 * nb + b] - QP[a2 * nb + b])
                cases.append((a1, a2, b))
    return ConsistencyReport.from_residuals(
        "product-distributivity", as_array(res) if res else np.zeros(0),
        np.array(cases, dtype=np.int64).reshape(-1, 3), tol)
