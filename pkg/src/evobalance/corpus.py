"""Fixed graph corpus for fairness estimation.

Every connected graph on up to five vertices (one representative per
isomorphism class, 31 graphs), plus three eight-vertex shapes: the complete
graph, the star, and the path. Small enough for exact enumeration oracles,
varied enough to exercise degree asymmetry.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations

from .evolving_graph import Graph

__all__ = ["connected_graphs_upto", "fairness_corpus"]


def _is_connected(n: int, edges: frozenset[tuple[int, int]]) -> bool:
    if n == 1:
        return True
    nbrs: dict[int, list[int]] = {v: [] for v in range(n)}
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    seen = {0}
    stack = [0]
    while stack:
        for w in nbrs[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def _canonical(n: int, edges: frozenset[tuple[int, int]]) -> tuple:
    best = None
    for perm in permutations(range(n)):
        relabeled = tuple(sorted(
            (min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in edges))
        if best is None or relabeled < best:
            best = relabeled
    return best


@lru_cache(maxsize=None)
def connected_graphs_upto(n_max: int = 5) -> tuple[tuple[str, Graph], ...]:
    """One representative per isomorphism class of connected graphs, n <= n_max."""
    out: list[tuple[str, Graph]] = []
    for n in range(1, n_max + 1):
        pairs = list(combinations(range(n), 2))
        seen: set[tuple] = set()
        index = 0
        for bits in range(1 << len(pairs)):
            edges = frozenset(pairs[i] for i in range(len(pairs))
                              if bits >> i & 1)
            if not _is_connected(n, edges):
                continue
            key = _canonical(n, edges)
            if key in seen:
                continue
            seen.add(key)
            out.append((f"n{n}_{index}", Graph.from_edges(n, sorted(edges))))
            index += 1
    return tuple(out)


@lru_cache(maxsize=None)
def fairness_corpus() -> tuple[tuple[str, Graph], ...]:
    """The 31 small connected graphs plus K8, the star K1,7 and the path P8."""
    eight = [
        ("K8", [(u, v) for u, v in combinations(range(8), 2)]),
        ("K1_7", [(0, v) for v in range(1, 8)]),
        ("P8", [(v, v + 1) for v in range(7)]),
    ]
    extra = tuple((name, Graph.from_edges(8, edges)) for name, edges in eight)
    return connected_graphs_upto(5) + extra
