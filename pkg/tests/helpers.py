"""Shared generators and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from latticecalc.poset import Poset, build_poset

FIXTURES = Path(__file__).parent / "fixtures"


def random_dag(rng: np.random.Generator, n: int, p: float = 0.3) -> list[tuple[int, int]]:
    """Random edges ``i -> j`` with ``i < j`` in a shuffled relabelling."""
    perm = rng.permutation(n)
    return [(int(perm[i]), int(perm[j])) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def random_poset(rng: np.random.Generator, n: int, p: float = 0.3) -> Poset:
    return build_poset([f"e{i}" for i in range(n)], random_dag(rng, n, p))


def reachability(n: int, edges) -> np.ndarray:
    """Reflexive-transitive closure by DFS from every node."""
    succ = [[] for _ in range(n)]
    for a, b in edges:
        succ[a].append(b)
    R = np.eye(n, dtype=bool)
    for s in range(n):
        stack = [s]
        while stack:
            u = stack.pop()
            for v in succ[u]:
                if not R[s, v]:
                    R[s, v] = True
                    stack.append(v)
    return R


def brute_join(order: np.ndarray, x: int, y: int) -> int | None:
    ub = [z for z in range(len(order)) if order[x, z] and order[y, z]]
    least = [z for z in ub if all(order[z, w] for w in ub)]
    return least[0] if least else None


def brute_meet(order: np.ndarray, x: int, y: int) -> int | None:
    return brute_join(order.T, x, y)


def mobius_oracle(order: np.ndarray) -> np.ndarray:
    """Recursive definition, memoised: mu(x,x)=1, mu(x,y) = -sum_{x<=z<y} mu(x,z)."""
    n = len(order)
    memo: dict[tuple[int, int], int] = {}

    def mu(x, y):
        if (x, y) in memo:
            return memo[x, y]
        if x == y:
            v = 1
        elif not order[x, y]:
            v = 0
        else:
            v = -sum(mu(x, z) for z in range(n) if order[x, z] and order[z, y] and z != y)
        memo[x, y] = v
        return v

    return np.array([[mu(x, y) for y in range(n)] for x in range(n)], dtype=np.int64)


def downsets_oracle(order: np.ndarray) -> set[int]:
    n = len(order)
    out = set()
    for bits in range(1 << n):
        members = [i for i in range(n) if bits >> i & 1]
        if all(bits >> z & 1 for x in members for z in range(n) if order[z, x]):
            out.add(bits)
    return out


def subsets(items):
    items = list(items)
    return itertools.chain.from_iterable(itertools.combinations(items, r) for r in range(len(items) + 1))
