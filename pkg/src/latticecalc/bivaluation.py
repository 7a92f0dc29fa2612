"""Bi-quantifications ``b([x, t])`` on directed intervals of a distributive lattice.

The evaluator is the ratio ``q(x ^ t) / q(t)`` of a positive valuation ``q``;
``t`` is the context. Contexts of zero measure (always including the bottom)
are undefined, and every check below skips tuples that would need one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    InconsistentValuation,
    NonPositiveValuation,
    NotDistributive,
    ZeroDenominator,
)
from .lattice import Lattice, check_laws, product
from .poset import Ref
from .quantify import ConsistencyReport, Quantification, check_consistency, default_tol, product_quantify


class BiQuantification:
    def __init__(self, lattice: Lattice, q: Quantification):
        self.lattice = lattice
        self.q = q
        Q = np.array([float(v) for v in q.values])
        self._Q = Q
        self.defined = Q > 0
        M = np.asarray(lattice.meet_table)
        with np.errstate(divide="ignore", invalid="ignore"):
            B = Q[M] / Q[None, :]
        B[:, ~self.defined] = np.nan
        B.flags.writeable = False
        self.matrix = B

    def __repr__(self) -> str:
        return f"BiQuantification({self.lattice.name or 'lattice'}, n={self.lattice.n})"

    def __call__(self, x: Ref, t: Ref):
        return self.value(x, t)

    def value(self, x: Ref, t: Ref):
        """``b([x, t])``; a Fraction when the base valuation is exact."""
        l = self.lattice
        i, j = l.index(x), l.index(t)
        if not self.defined[j]:
            raise ZeroDenominator(f"context {l.label(j)} has zero measure")
        num, den = self.q.values[int(l.meet_table[i, j])], self.q.values[j]
        if self.q.exact:
            return Fraction(num) / Fraction(den)
        return num / den


def from_valuation(l: Lattice, q: Quantification, tol: float | None = None) -> BiQuantification:
    """Validated ratio bi-quantification.

    Requires a distributive lattice and a sum-rule consistent ``q`` with
    ``q(bottom) = 0`` and ``q > 0`` everywhere else.
    """
    l.require_lattice()
    laws = check_laws(l)
    if not laws.distributive:
        bad = "D1" if not laws["D1"].passed else "D2"
        raise NotDistributive(f"{l.name or 'lattice'} violates {bad} at {laws.witness_labels(bad)}")
    bot = l.bottom
    if q.values[bot] != 0:
        raise InconsistentValuation(f"bottom must carry 0, got {q.values[bot]!r}")
    nonpos = [l.label(i) for i, v in enumerate(q.values) if i != bot and not v > 0]
    if nonpos:
        raise NonPositiveValuation(f"valuation is not strictly positive at {nonpos}")
    if tol is None:
        tol = 0.0 if q.exact else default_tol(q.values)
    rep = check_consistency(l, q, tol)
    if not rep.passed:
        a, b = rep.worst
        raise InconsistentValuation(
            f"valuation violates the sum rule at ({l.label(a)}, {l.label(b)}), residual {rep.max_residual}")
    return BiQuantification(l, q)


def product_bivaluation(bA: BiQuantification, bB: BiQuantification) -> BiQuantification:
    """Bi-quantification on ``product(A, B)`` whose base is the direct product of the factor bases.

    Its values factor as ``b([(a, b), (z, t)]) = bA([a, z]) * bB([b, t])``.
    The product base is generally not additive on the product lattice, so no
    sum-rule validation is applied.
    """
    prod = product(bA.lattice, bB.lattice)
    return BiQuantification(prod, product_quantify(bA.q, bB.q, prod))


# -- sweeps --------------------------------------------------------------------

def _report(name, r, cases, tol) -> ConsistencyReport:
    return ConsistencyReport.from_residuals(name, np.asarray(r, dtype=float), np.asarray(cases), tol)


def check_bi_sum_rule(b: BiQuantification, t: Ref, tol: float = 1e-9) -> ConsistencyReport:
    """``b([x v y, t]) - b([x, t]) - b([y, t]) + b([x ^ y, t])`` over all pairs ``x, y``."""
    l = b.lattice
    k = l.index(t)
    if not b.defined[k]:
        raise ZeroDenominator(f"context {l.label(k)} has zero measure")
    col = b.matrix[:, k]
    i, j = np.triu_indices(l.n, k=0)
    J, M = np.asarray(l.join_table), np.asarray(l.meet_table)
    r = col[J[i, j]] - col[i] - col[j] + col[M[i, j]]
    return _report("bi-sum-rule", r, np.stack([i, j], axis=1), tol)


def _chain_cases(b: BiQuantification) -> np.ndarray:
    order = b.lattice.poset.order
    d = b.defined
    mask = order[:, :, None] & order[None, :, :] & d[None, :, None] & d[None, None, :]
    return np.argwhere(mask)


def check_chain_rule(b: BiQuantification, tol: float = 1e-9, factors: tuple[BiQuantification, BiQuantification] | None = None
                     ) -> ConsistencyReport:
    """``b([x, z]) - b([x, y]) * b([y, z])`` over every chain ``x <= y <= z``.

    With ``factors`` the same sweep is repeated on the product of the two
    factor bi-quantifications and folded into the verdict.
    """
    B = b.matrix
    c = _chain_cases(b)
    x, y, z = c[:, 0], c[:, 1], c[:, 2]
    rep = _report("chain-rule", B[x, z] - B[x, y] * B[y, z], c, tol)
    if factors is not None:
        part = check_product_space_consistency(*factors, tol=tol)
        rep.parts["product-space"] = part
        rep.passed = rep.passed and part.passed
    return rep


def check_diamond_lemma(b: BiQuantification, tol: float = 1e-9) -> ConsistencyReport:
    """``b([x ^ y, x]) - b([y, x])`` for all pairs with ``x`` a defined context."""
    l = b.lattice
    B = b.matrix
    M = np.asarray(l.meet_table)
    x, y = np.nonzero(np.broadcast_to(b.defined[:, None], (l.n, l.n)))
    return _report("diamond-lemma", B[M[x, y], x] - B[y, x], np.stack([x, y], axis=1), tol)


def check_product_rule(b: BiQuantification, tol: float = 1e-9) -> ConsistencyReport:
    """``b([y ^ z, x]) - b([z, x ^ y]) * b([y, x])`` over all admissible triples.

    Admissible means ``x`` and ``x ^ y`` are defined contexts. The diamond
    lemma sweep is attached as a part and counts towards ``passed``.
    """
    l = b.lattice
    B = b.matrix
    M = np.asarray(l.meet_table)
    n = l.n
    xs, ys = np.nonzero(b.defined[:, None] & b.defined[M])
    xy = M[xs, ys]
    cases, res = [], []
    zs = np.arange(n)
    for x, y, m in zip(xs, ys, xy):
        r = B[M[y, zs], x] - B[zs, m] * B[y, x]
        res.append(r)
        cases.append(np.stack([np.full(n, x), np.full(n, y), zs], axis=1))
    if res:
        rep = _report("product-rule", np.concatenate(res), np.concatenate(cases), tol)
    else:
        rep = _report("product-rule", np.zeros(0), np.zeros((0, 3), dtype=np.int64), tol)
    dl = check_diamond_lemma(b, tol)
    rep.parts["diamond-lemma"] = dl
    rep.passed = rep.passed and dl.passed
    return rep


def bayes(b: BiQuantification, x: Ref, y: Ref, z: Ref):
    """``b([y, x ^ z]) * b([z, x]) / b([y, x])``, which should equal ``b([z, x ^ y])``."""
    l = b.lattice
    i, j, k = l.index(x), l.index(y), l.index(z)
    xz = int(l.meet_table[i, k])
    xy = int(l.meet_table[i, j])
    for ctx in (i, xy, xz):
        if not b.defined[ctx]:
            raise ZeroDenominator(f"context {l.label(ctx)} has zero measure")
    den = b.value(j, i)
    if den == 0:
        raise ZeroDenominator(f"b([{l.label(j)}, {l.label(i)}]) = 0: the two are mutually exclusive")
    return b.value(j, xz) * b.value(k, i) / den


def check_bayes(b: BiQuantification, tol: float = 1e-9) -> ConsistencyReport:
    """Bayes form against the direct value ``b([z, x ^ y])`` over all admissible triples."""
    l = b.lattice
    B = b.matrix
    M = np.asarray(l.meet_table)
    d = b.defined
    res, cases = [], []
    zs = np.arange(l.n)
    for x in np.nonzero(d)[0]:
        for y in range(l.n):
            xy = M[x, y]
            if not d[xy] or B[y, x] == 0:
                continue
            ok = d[M[x, zs]]
            z = zs[ok]
            xz = M[x, z]
            direct = B[z, xy]
            via = B[y, xz] * B[z, x] / B[y, x]
            res.append(via - direct)
            cases.append(np.stack([np.full(len(z), x), np.full(len(z), y), z], axis=1))
    if not res:
        return _report("bayes", np.zeros(0), np.zeros((0, 3), dtype=np.int64), tol)
    return _report("bayes", np.concatenate(res), np.concatenate(cases), tol)


def check_direct_product_bi(bP: BiQuantification, bA: BiQuantification, bB: BiQuantification,
                            tol: float = 1e-12) -> ConsistencyReport:
    """``bP([(a, b), (z, t)]) - bA([a, z]) * bB([b, t])`` over all defined product contexts."""
    nb = bB.lattice.n
    k = np.arange(bP.lattice.n)
    ia, ib = np.divmod(k, nb)
    x, ctx = np.nonzero(np.broadcast_to(bP.defined[None, :], (len(k), len(k))))
    r = bP.matrix[x, ctx] - bA.matrix[ia[x], ia[ctx]] * bB.matrix[ib[x], ib[ctx]]
    return _report("direct-product-rule", r, np.stack([x, ctx], axis=1), tol)


def check_product_space_consistency(bA: BiQuantification, bB: BiQuantification, tol: float = 1e-9) -> ConsistencyReport:
    """Chain rule and direct product rule agree on the joint space of two factors.

    Sweeps the chain rule on ``product_bivaluation(bA, bB)`` and checks that
    its values factor into the factor bi-quantifications.
    """
    bP = product_bivaluation(bA, bB)
    c = _chain_cases(bP)
    B = bP.matrix
    x, y, z = c[:, 0], c[:, 1], c[:, 2]
    rep = _report("product-space-chain-rule", B[x, z] - B[x, y] * B[y, z], c, tol)
    dp = check_direct_product_bi(bP, bA, bB, tol)
    rep.parts["direct-product-rule"] = dp
    rep.passed = rep.passed and dp.passed
    return rep


# -- degree of inclusion -------------------------------------------------------------

@dataclass
class InclusionReport:
    passed: bool
    checked: int
    included: int = 0
    exclusive: int = 0
    partial: int = 0
    violations: list = field(default_factory=list)


def degree_of_inclusion_report(l: Lattice, b: BiQuantification) -> InclusionReport:
    """Compare ``b([x, y])`` with the dual zeta function on every pair with a defined context.

    Included pairs (``x >= y``) must give exactly 1 and exclusive pairs
    (``x ^ y = bottom``) exactly 0. Any other pair must land strictly inside (0, 1).
    """
    order = l.poset.order
    M = np.asarray(l.meet_table)
    bot = l.bottom
    rep = InclusionReport(True, 0)
    for x in range(l.n):
        for y in range(l.n):
            if not b.defined[y]:
                continue
            v = b.matrix[x, y]
            rep.checked += 1
            if order[y, x]:
                rep.included += 1
                expected, ok = 1.0, v == 1.0
            elif M[x, y] == bot:
                rep.exclusive += 1
                expected, ok = 0.0, v == 0.0
            else:
                rep.partial += 1
                expected, ok = "(0,1)", 0.0 < v < 1.0
            if not ok:
                rep.violations.append((x, y, float(v), expected))
    rep.passed = not rep.violations
    return rep
