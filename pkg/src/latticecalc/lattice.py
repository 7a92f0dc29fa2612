"""Join/meet tables, lattice classification, Table-1 style law checks and constructors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import BoundMissing, NotALattice, ParameterOutOfRange
from .poset import Poset, Ref, build_poset, downsets, iter_bits

ABSENT = -1

LATTICE = "lattice"
JOIN_SEMILATTICE = "join-semilattice"
MEET_SEMILATTICE = "meet-semilattice"
NOT_A_LATTICE = "not-a-lattice"


@dataclass(frozen=True, eq=False)
class Lattice:
    """A poset together with its join and meet tables.

    Table entries are element indices, or ``ABSENT`` (-1) where the bound
    does not exist, so semilattices are represented as they are.
    """

    poset: Poset
    join_table: np.ndarray
    meet_table: np.ndarray
    kind: str
    name: str = ""
    standard: tuple[str, Any] | None = None
    sets: tuple[frozenset, ...] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.poset)

    @property
    def n(self) -> int:
        return len(self.poset)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.poset.labels

    def index(self, ref: Ref) -> int:
        return self.poset.index(ref)

    def label(self, i: int) -> str:
        return self.poset.labels[i]

    @property
    def bottom(self) -> int | None:
        return self.poset.bottom()

    @property
    def top(self) -> int | None:
        return self.poset.top()

    def leq(self, x: Ref, y: Ref) -> bool:
        return bool(self.poset.order[self.index(x), self.index(y)])

    def join(self, x: Ref, y: Ref) -> int:
        return join(self, x, y)

    def meet(self, x: Ref, y: Ref) -> int:
        return meet(self, x, y)

    @property
    def is_lattice(self) -> bool:
        return self.kind == LATTICE

    def require_lattice(self) -> None:
        if self.kind != LATTICE:
            raise NotALattice(f"{self.name or 'poset'} is a {self.kind}, not a lattice")


def _bound_tables(p: Poset) -> tuple[np.ndarray, np.ndarray]:
    n = len(p)
    pos = {x: k for k, x in enumerate(p.linear_extension)}
    # bitsets re-indexed by linear-extension position: the lowest set bit of an
    # upper-bound set is the only possible least element, the highest set bit of
    # a lower-bound set the only possible greatest one
    up_pos = [0] * n
    down_pos = [0] * n
    for x in range(n):
        up_pos[x] = sum(1 << pos[y] for y in iter_bits(p.up[x]))
        down_pos[x] = sum(1 << pos[y] for y in iter_bits(p.down[x]))
    at = p.linear_extension
    J = np.full((n, n), ABSENT, dtype=np.int64)
    M = np.full((n, n), ABSENT, dtype=np.int64)
    for x in range(n):
        J[x, x] = M[x, x] = x
        for y in range(x + 1, n):
            u = up_pos[x] & up_pos[y]
            if u:
                c = (u & -u).bit_length() - 1
                if u & ~up_pos[at[c]] == 0:
                    J[x, y] = J[y, x] = at[c]
            d = down_pos[x] & down_pos[y]
            if d:
                c = d.bit_length() - 1
                if d & ~down_pos[at[c]] == 0:
                    M[x, y] = M[y, x] = at[c]
    J.flags.writeable = False
    M.flags.writeable = False
    return J, M


def classify(p: Poset, name: str = "", standard=None, sets=None) -> Lattice:
    """Compute join/meet tables of ``p`` and decide what kind of structure it is."""
    J, M = _bound_tables(p)
    all_joins = bool((J != ABSENT).all())
    all_meets = bool((M != ABSENT).all())
    if all_joins and all_meets:
        kind = LATTICE
    elif all_joins:
        kind = JOIN_SEMILATTICE
    elif all_meets:
        kind = MEET_SEMILATTICE
    else:
        kind = NOT_A_LATTICE
    return Lattice(p, J, M, kind, name=name, standard=standard, sets=sets)


def minimal_upper_bounds(l: Lattice, x: Ref, y: Ref) -> list[int]:
    p = l.poset
    u = p.up[l.index(x)] & p.up[l.index(y)]
    return [c for c in iter_bits(u) if p.down[c] & u == 1 << c]


def maximal_lower_bounds(l: Lattice, x: Ref, y: Ref) -> list[int]:
    p = l.poset
    d = p.down[l.index(x)] & p.down[l.index(y)]
    return [c for c in iter_bits(d) if p.up[c] & d == 1 << c]


def join(l: Lattice, x: Ref, y: Ref) -> int:
    i, j = l.index(x), l.index(y)
    r = int(l.join_table[i, j])
    if r == ABSENT:
        raise BoundMissing(f"{l.label(i)} and {l.label(j)} have no join (minimal upper bounds: "
                           f"{[l.label(c) for c in minimal_upper_bounds(l, i, j)]})")
    return r


def meet(l: Lattice, x: Ref, y: Ref) -> int:
    i, j = l.index(x), l.index(y)
    r = int(l.meet_table[i, j])
    if r == ABSENT:
        raise BoundMissing(f"{l.label(i)} and {l.label(j)} have no meet (maximal lower bounds: "
                           f"{[l.label(c) for c in maximal_lower_bounds(l, i, j)]})")
    return r


# -- law checking -----------------------------------------------------------

LAWS = {
    "L1": "idempotency",
    "L2": "absorption",
    "L3": "commutativity",
    "L4": "associativity",
    "L5": "consistency",
    "D1": "join distributes over meet",
    "D2": "meet distributes over join",
}


@dataclass(frozen=True)
class LawResult:
    law: str
    passed: bool
    witness: tuple[int, ...] | None = None


@dataclass(frozen=True)
class LawReport:
    results: dict[str, LawResult]
    labels: tuple[str, ...]

    def __getitem__(self, law: str) -> LawResult:
        return self.results[law]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    @property
    def lattice_laws_hold(self) -> bool:
        return all(self.results[k].passed for k in ("L1", "L2", "L3", "L4", "L5"))

    @property
    def distributive(self) -> bool:
        return self.results["D1"].passed and self.results["D2"].passed

    def witness_labels(self, law: str) -> tuple[str, ...] | None:
        w = self.results[law].witness
        return None if w is None else tuple(self.labels[i] for i in w)


def _first(mask: np.ndarray) -> tuple[int, ...] | None:
    hits = np.argwhere(mask)
    return None if len(hits) == 0 else tuple(int(v) for v in hits[0])


def check_laws(l: Lattice) -> LawReport:
    """Exhaustively check L1-L5 over pairs and L4, D1, D2 over triples."""
    l.require_lattice()
    J = np.asarray(l.join_table)
    M = np.asarray(l.meet_table)
    n = l.n
    idx = np.arange(n)
    res: dict[str, LawResult] = {}

    bad = (J[idx, idx] != idx) | (M[idx, idx] != idx)
    w = _first(bad)
    res["L1"] = LawResult("L1", w is None, w)

    a = idx[:, None]
    bad = (J[a, M] != a) | (M[a, J] != a)
    w = _first(bad)
    res["L2"] = LawResult("L2", w is None, w)

    bad = (J != J.T) | (M != M.T)
    w = _first(bad)
    res["L3"] = LawResult("L3", w is None, w)

    order = l.poset.order
    bad = (order != (M == a)) | (order != (J == idx[None, :]))
    w = _first(bad)
    res["L5"] = LawResult("L5", w is None, w)

    witnesses: dict[str, tuple[int, ...] | None] = {"L4": None, "D1": None, "D2": None}
    for x in range(n):
        Jx, Mx = J[x], M[x]
        checks = {
            "L4": (Jx[J] != J[Jx]) | (Mx[M] != M[Mx]),
            "D1": Jx[M] != M[Jx[:, None], Jx[None, :]],
            "D2": Mx[J] != J[Mx[:, None], Mx[None, :]],
        }
        for law, mask in checks.items():
            if witnesses[law] is None:
                w = _first(mask)
                if w is not None:
                    witnesses[law] = (x,) + w
        if all(v is not None for v in witnesses.values()):
            break
    for law in ("L4", "D1", "D2"):
        res[law] = LawResult(law, witnesses[law] is None, witnesses[law])
    ordered = {k: res[k] for k in LAWS}
    return LawReport(ordered, l.labels)


def is_distributive(l: Lattice) -> bool:
    return l.is_lattice and check_laws(l).distributive


def join_irreducibles(l: Lattice) -> list[int]:
    """Elements with exactly one lower cover (the bottom is never included)."""
    l.require_lattice()
    return [x for x in range(l.n) if len(l.poset.lower_covers[x]) == 1]


def join_of(l: Lattice, elements: Sequence[int]) -> int | None:
    """Join of a collection of elements; the empty join is the bottom."""
    acc = l.bottom
    for e in elements:
        acc = e if acc is None else int(l.join_table[acc, e])
    return acc


# -- products ----------------------------------------------------------------

def product(A: Lattice, B: Lattice) -> Lattice:
    """Cartesian product with componentwise order; element ``(i, j)`` has index ``i*|B| + j``."""
    A.require_lattice()
    B.require_lattice()
    na, nb = A.n, B.n
    labels = [f"({a},{b})" for a in A.labels for b in B.labels]
    covers = []
    for i, i2 in A.poset.covers:
        for j in range(nb):
            covers.append((i * nb + j, i2 * nb + j))
    for j, j2 in B.poset.covers:
        for i in range(na):
            covers.append((i * nb + j, i * nb + j2))
    p = build_poset(labels, covers)
    ia, ib = np.divmod(np.arange(na * nb), nb)
    J = A.join_table[ia[:, None], ia[None, :]] * nb + B.join_table[ib[:, None], ib[None, :]]
    M = A.meet_table[ia[:, None], ia[None, :]] * nb + B.meet_table[ib[:, None], ib[None, :]]
    J.flags.writeable = False
    M.flags.writeable = False
    name = f"{A.name or 'A'} x {B.name or 'B'}"
    return Lattice(p, J, M, LATTICE, name=name, standard=("product", (A, B)))


def split_index(A: Lattice, B: Lattice, k: int) -> tuple[int, int]:
    return divmod(k, B.n)


# -- standard lattices ----------------------------------------------------------

MAX_BOOLEAN = 6
MAX_DIVISOR = 10_000


def _set_label(s, names) -> str:
    return "{" + ",".join(names[i] for i in sorted(s)) + "}"


def boolean_lattice(n: int, atoms: Sequence[str] | None = None) -> Lattice:
    if not isinstance(n, (int, np.integer)) or not 0 <= n <= MAX_BOOLEAN:
        raise ParameterOutOfRange(f"boolean lattice needs 0 <= n <= {MAX_BOOLEAN}, got {n!r}")
    names = [str(a) for a in atoms] if atoms is not None else [str(i + 1) for i in range(n)]
    if len(names) != n:
        raise ParameterOutOfRange(f"{len(names)} atom names given for n={n}")
    masks = sorted(range(1 << n), key=lambda m: (m.bit_count(), m))
    sets = tuple(frozenset(iter_bits(m)) for m in masks)
    labels = [_set_label(s, names) for s in sets]
    pos = {m: k for k, m in enumerate(masks)}
    covers = [(pos[m], pos[m | 1 << i]) for m in masks for i in range(n) if not m >> i & 1]
    return classify(build_poset(labels, covers), name=f"B{n}", standard=("boolean", n),
                    sets=tuple(frozenset(names[i] for i in s) for s in sets))


def chain_lattice(n: int, labels: Sequence[str] | None = None) -> Lattice:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterOutOfRange(f"chain needs n >= 1, got {n!r}")
    labels = [str(x) for x in labels] if labels is not None else [str(i) for i in range(n)]
    if len(labels) != n:
        raise ParameterOutOfRange(f"{len(labels)} labels given for chain of length {n}")
    return classify(build_poset(labels, zip(range(n - 1), range(1, n))), name=f"C{n}",
                    standard=("chain", n))


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def divisor_lattice(n: int) -> Lattice:
    """Divisors of ``n`` ordered by divisibility (join = lcm, meet = gcd)."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_DIVISOR:
        raise ParameterOutOfRange(f"divisor lattice needs 1 <= n <= {MAX_DIVISOR}, got {n!r}")
    ds = divisors(int(n))
    pos = {d: k for k, d in enumerate(ds)}
    covers = []
    for d in ds:
        for e in ds:
            if e > d and e % d == 0:
                covers.append((pos[d], pos[e]))
    return classify(build_poset([str(d) for d in ds], covers), name=f"D{n}", standard=("divisor", int(n)))


def m3() -> Lattice:
    labels = ["bot", "a", "b", "c", "top"]
    covers = [("bot", "a"), ("bot", "b"), ("bot", "c"), ("a", "top"), ("b", "top"), ("c", "top")]
    return classify(build_poset(labels, covers), name="M3", standard=("m3", None))


def n5() -> Lattice:
    labels = ["bot", "a", "b", "c", "top"]
    covers = [("bot", "a"), ("a", "b"), ("b", "top"), ("bot", "c"), ("c", "top")]
    return classify(build_poset(labels, covers), name="N5", standard=("n5", None))


def downset_lattice(p: Poset) -> Lattice:
    """All downsets of ``p`` ordered by inclusion."""
    ds = downsets(p)
    pos = {d: k for k, d in enumerate(ds)}
    covers = []
    for d in ds:
        for x in range(len(p)):
            # adding x keeps a downset exactly when everything strictly below x is in d
            if not d >> x & 1 and (p.down[x] & ~(1 << x)) & ~d == 0:
                covers.append((pos[d], pos[d | 1 << x]))
    sets = tuple(frozenset(p.labels[i] for i in iter_bits(d)) for d in ds)
    labels = ["{" + ",".join(p.labels[i] for i in iter_bits(d)) + "}" for d in ds]
    return classify(build_poset(labels, covers), name="downsets", standard=("downset", p), sets=sets)


STANDARD_KINDS = ("boolean", "chain", "divisor", "m3", "n5", "downset")


def make_standard(kind: str, parameter=None) -> Lattice:
    kind = kind.lower().replace("_", "-")
    if kind == "boolean":
        return boolean_lattice(parameter)
    if kind == "chain":
        return chain_lattice(parameter)
    if kind == "divisor":
        return divisor_lattice(parameter)
    if kind == "m3":
        return m3()
    if kind == "n5":
        return n5()
    if kind in ("downset", "downset-of"):
        if not isinstance(parameter, Poset):
            raise ParameterOutOfRange("downset-of needs a Poset parameter")
        return downset_lattice(parameter)
    raise ParameterOutOfRange(f"unknown standard lattice kind {kind!r}")
