"""Finite posets: construction from covers, order queries, intervals, zeta and Moebius.

Elements are dense integer indices ``0..n-1`` with a unique string label each.
The order is kept twice: as Python-int bitsets (``up``/``down``) for fast set
algebra, and as a read-only boolean numpy matrix ``order`` with
``order[x, y] == (x <= y)``.
"""

from __future__ import annotations

from functools import cached_property
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import CycleDetected, DuplicateLabel, UnknownElement, UnknownLabel

Ref = Union[int, str]


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Poset:
    """Immutable finite partial order.

    Build instances with :func:`build_poset`; the constructor trusts its
    arguments.
    """

    def __init__(self, labels: tuple[str, ...], covers: frozenset, up: tuple[int, ...], down: tuple[int, ...]):
        self.labels = labels
        self.covers = covers
        self.up = up
        self.down = down
        self._index = {lab: i for i, lab in enumerate(labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"Poset(n={len(self)}, covers={len(self.covers)})"

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, ref: Ref) -> int:
        if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool):
            if 0 <= ref < len(self.labels):
                return int(ref)
            raise UnknownElement(f"index {ref} out of range for poset of size {len(self.labels)}")
        try:
            return self._index[ref]
        except (KeyError, TypeError):
            raise UnknownElement(f"unknown element {ref!r}") from None

    def label(self, i: int) -> str:
        return self.labels[i]

    @cached_property
    def order(self) -> np.ndarray:
        n = len(self.labels)
        m = np.zeros((n, n), dtype=bool)
        for x, mask in enumerate(self.up):
            for y in iter_bits(mask):
                m[x, y] = True
        m.flags.writeable = False
        return m

    @cached_property
    def lower_covers(self) -> tuple[tuple[int, ...], ...]:
        low: list[list[int]] = [[] for _ in self.labels]
        for a, b in self.covers:
            low[b].append(a)
        return tuple(tuple(sorted(c)) for c in low)

    @cached_property
    def upper_covers(self) -> tuple[tuple[int, ...], ...]:
        upp: list[list[int]] = [[] for _ in self.labels]
        for a, b in self.covers:
            upp[a].append(b)
        return tuple(tuple(sorted(c)) for c in upp)

    @cached_property
    def rank(self) -> tuple[int, ...]:
        """Length of the longest chain from a minimal element up to each element."""
        r = [0] * len(self.labels)
        for x in self._topological:
            for c in self.upper_covers[x]:
                r[c] = max(r[c], r[x] + 1)
        return tuple(r)

    @cached_property
    def _topological(self) -> tuple[int, ...]:
        # Fewer elements below means earlier; ties by index. Strictly-below
        # sets are strictly smaller, so this is a linear extension.
        return tuple(sorted(range(len(self.labels)), key=lambda x: (self.down[x].bit_count(), x)))

    @cached_property
    def linear_extension(self) -> tuple[int, ...]:
        """Elements sorted by (rank, index); every element follows all elements below it."""
        return tuple(sorted(range(len(self.labels)), key=lambda x: (self.rank[x], x)))

    def minimal(self) -> list[int]:
        return [x for x in range(len(self.labels)) if self.down[x] == 1 << x]

    def maximal(self) -> list[int]:
        return [x for x in range(len(self.labels)) if self.up[x] == 1 << x]

    def bottom(self) -> int | None:
        mins = self.minimal()
        return mins[0] if len(mins) == 1 and self.up[mins[0]] == (1 << len(self.labels)) - 1 else None

    def top(self) -> int | None:
        maxs = self.maximal()
        return maxs[0] if len(maxs) == 1 and self.down[maxs[0]] == (1 << len(self.labels)) - 1 else None

    def cover_pairs(self) -> list[tuple[str, str]]:
        """Cover relation as sorted label pairs (lower, upper)."""
        return [(self.labels[a], self.labels[b]) for a, b in sorted(self.covers)]


def _closure_bitsets(n: int, succ: Sequence[Iterable[int]]) -> tuple[list[int], list[int]]:
    ts = TopologicalSorter({x: list(succ[x]) for x in range(n)})
    try:
        # successors are the "dependencies", so static_order yields tops first
        topo = list(ts.static_order())
    except CycleError as exc:
        cycle = exc.args[1] if len(exc.args) > 1 else ()
        raise CycleDetected(f"cover relation has a cycle through {list(cycle)}") from None
    up = [0] * n
    for x in topo:
        m = 1 << x
        for c in succ[x]:
            m |= up[c]
        up[x] = m
    down = [0] * n
    for x in range(n):
        for y in iter_bits(up[x]):
            down[y] |= 1 << x
    return up, down


def _reduce(up: Sequence[int], down: Sequence[int]) -> frozenset:
    covers = set()
    for x, mask in enumerate(up):
        strict_up = mask & ~(1 << x)
        for y in iter_bits(strict_up):
            strict_down_y = down[y] & ~(1 << y)
            if strict_up & strict_down_y == 0:
                covers.add((x, y))
    return frozenset(covers)


def build_poset(labels: Sequence[str], covers: Iterable[tuple[Ref, Ref]] = ()) -> Poset:
    """Build a poset from labels and a (possibly redundant) cover relation.

    Cover pairs are ``(lower, upper)`` and may be given by label or index.
    Redundant, transitively implied pairs are dropped silently.
    """
    labels = tuple(str(lab) for lab in labels)
    index: dict[str, int] = {}
    for i, lab in enumerate(labels):
        if lab in index:
            raise DuplicateLabel(f"label {lab!r} appears more than once")
        index[lab] = i
    n = len(labels)

    def resolve(ref):
        if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool):
            if 0 <= ref < n:
                return int(ref)
            raise UnknownLabel(f"cover endpoint index {ref} out of range")
        try:
            return index[str(ref)]
        except KeyError:
            raise UnknownLabel(f"cover endpoint {ref!r} is not a declared label") from None

    succ: list[set[int]] = [set() for _ in range(n)]
    for a, b in covers:
        i, j = resolve(a), resolve(b)
        if i == j:
            raise CycleDetected(f"self-cover on {labels[i]!r}")
        succ[i].add(j)
    up, down = _closure_bitsets(n, succ)
    return Poset(labels, _reduce(up, down), tuple(up), tuple(down))


def poset_from_order(labels: Sequence[str], order: np.ndarray) -> Poset:
    """Build a poset from a full boolean ``<=`` matrix (validated)."""
    order = np.asarray(order, dtype=bool)
    n = len(labels)
    if order.shape != (n, n):
        raise ValueError(f"order matrix shape {order.shape} does not match {n} labels")
    pairs = [(int(a), int(b)) for a, b in zip(*np.nonzero(order)) if a != b]
    p = build_poset(labels, pairs)
    if not np.array_equal(p.order, order | np.eye(n, dtype=bool)):
        raise ValueError("order matrix is not transitive")
    return p


def transitive_reduction(p: Poset) -> frozenset:
    return _reduce(p.up, p.down)


def leq(p: Poset, x: Ref, y: Ref) -> bool:
    i, j = p.index(x), p.index(y)
    return bool(p.up[i] >> j & 1)


def interval(p: Poset, a: Ref, b: Ref) -> frozenset[int]:
    """Indices of ``{x : a <= x <= b}``; empty when ``a`` is not below ``b``."""
    i, j = p.index(a), p.index(b)
    return frozenset(iter_bits(p.up[i] & p.down[j]))


def zeta(p: Poset) -> np.ndarray:
    return p.order.astype(np.int64)


def dual_zeta(p: Poset) -> np.ndarray:
    return zeta(p).T.copy()


def mobius(p: Poset) -> np.ndarray:
    """Integer Moebius function, the inverse of :func:`zeta`.

    Columns are filled in a linear extension using
    ``mu(x, y) = delta(x, y) - sum_{x <= z < y} mu(x, z)``.
    """
    n = len(p)
    mu = np.zeros((n, n), dtype=np.int64)
    for y in p.linear_extension:
        below = [z for z in iter_bits(p.down[y]) if z != y]
        col = -mu[:, below].sum(axis=1) if below else np.zeros(n, dtype=np.int64)
        col[y] += 1
        mu[:, y] = col
    return mu


def downsets(p: Poset) -> list[int]:
    """All downsets of ``p`` as bitsets over element indices, the empty one included.

    Branches on elements in reverse linear extension: an element may be left
    out freely, while including it forces everything below it in.
    """
    order = list(reversed(p.linear_extension))
    out: list[int] = []

    def rec(k: int, chosen: int, banned: int) -> None:
        if k == len(order):
            out.append(chosen)
            return
        x = order[k]
        if chosen >> x & 1:
            rec(k + 1, chosen, banned)
            return
        # exclude x: nothing above x may be in; all those were decided earlier
        rec(k + 1, chosen, banned | (1 << x))
        if not (p.down[x] & banned):
            rec(k + 1, chosen | p.down[x], banned)

    rec(0, 0, 0)
    out.sort(key=lambda m: (m.bit_count(), m))
    return out
