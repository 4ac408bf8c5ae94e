"""Simple graphs under per-pair birth/death dynamics.

Every unordered vertex pair carries an independent two-state Markov chain:
an absent pair becomes an edge with probability p, an existing edge dies
with probability q, one random decision per pair per step. The analytic
helpers expose the chain's stationary edge probability p/(p+q) and a step
count after which any start is within a total-variation tolerance of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Graph",
    "EdgeMarkovParams",
    "new_graph",
    "evolve",
    "degree",
    "stationary_edge_probability",
    "mixing_steps",
    "read_edge_list",
]

# cached upper-triangle pair indices, keyed by vertex count
_PAIRS: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _PAIRS:
        _PAIRS[n] = np.triu_indices(n, k=1)
    return _PAIRS[n]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 0..n-1.

    The adjacency matrix is boolean, symmetric, with a zero diagonal, and is
    frozen after construction. Values are immutable snapshots: one graph per
    time step.
    """

    n: int
    adj: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one vertex, got n={self.n}")
        a = self.adj
        if a.shape != (self.n, self.n) or a.dtype != np.bool_:
            raise ValueError("adjacency must be a boolean (n, n) matrix")
        if a.flags.writeable:
            # keep a private frozen copy so later caller mutation is harmless
            a = a.copy()
            a.flags.writeable = False
            object.__setattr__(self, "adj", a)
        if np.diagonal(self.adj).any():
            raise ValueError("self-loops are not allowed in a simple graph")
        if not np.array_equal(self.adj, self.adj.T):
            raise ValueError("adjacency must be symmetric")

    @classmethod
    def _wrap(cls, n: int, adj: np.ndarray) -> "Graph":
        """Trusted constructor for internally built matrices (skips checks)."""
        g = object.__new__(cls)
        adj.flags.writeable = False
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "adj", adj)
        return g

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int]]) -> "Graph":
        adj = np.zeros((n, n), dtype=bool)
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
            if u == v:
                raise ValueError(f"edge ({u}, {v}) is a self-loop")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"edge ({u}, {v}) appears more than once")
            seen.add(key)
            adj[u, v] = adj[v, u] = True
        return cls(n, adj)

    @property
    def edge_count(self) -> int:
        return int(self.adj.sum()) // 2

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges as (lo, hi) pairs in lexicographic order."""
        iu, iv = _pair_indices(self.n)
        mask = self.adj[iu, iv]
        return np.column_stack((iu[mask], iv[mask]))

    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1).astype(np.int64)

    def degree(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range for n={self.n}")
        return int(self.adj[v].sum())

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u, v])

    def is_complete(self) -> bool:
        return self.edge_count == self.n * (self.n - 1) // 2


@dataclass(frozen=True)
class EdgeMarkovParams:
    """Birth probability p in (0, 1] and death probability q in [0, 1)."""

    p: float
    q: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"birth probability p must be in (0, 1], got {self.p}")
        if not 0.0 <= self.q < 1.0:
            raise ValueError(f"death probability q must be in [0, 1), got {self.q}")

    @property
    def stationary_density(self) -> float:
        return self.p / (self.p + self.q)

    @property
    def correlation(self) -> float:
        """Per-pair autocorrelation of successive steps, 1 - p - q."""
        return 1.0 - self.p - self.q

    @property
    def transition_matrix(self) -> np.ndarray:
        return np.array([[1.0 - self.p, self.p], [self.q, 1.0 - self.q]])

    @property
    def r(self) -> float:
        """max{p/(1-q), (1-q)/p}, the asymmetry factor of the step bound."""
        return max(self.p / (1.0 - self.q), (1.0 - self.q) / self.p)


def new_graph(
    n: int,
    init: str | Sequence[tuple[int, int]],
    *,
    params: EdgeMarkovParams | None = None,
    rng: np.random.Generator | None = None,
) -> Graph:
    """Build an initial graph.

    `init` is "empty", "complete", "stationary" (each pair present with the
    stationary probability p/(p+q); requires params and rng), "file:PATH"
    (edge-list file), or an explicit sequence of edges.
    """
    if n < 1:
        raise ValueError(f"need at least one vertex, got n={n}")
    if not isinstance(init, str):
        return Graph.from_edges(n, init)
    if init == "empty":
        return Graph(n, np.zeros((n, n), dtype=bool))
    if init == "complete":
        adj = np.ones((n, n), dtype=bool)
        np.fill_diagonal(adj, False)
        return Graph._wrap(n, adj)
    if init == "stationary":
        if params is None or rng is None:
            raise ValueError("stationary initializer needs params and rng")
        iu, iv = _pair_indices(n)
        present = rng.random(iu.size) < params.stationary_density
        adj = np.zeros((n, n), dtype=bool)
        adj[iu, iv] = present
        adj[iv, iu] = present
        return Graph._wrap(n, adj)
    if init.startswith("file:"):
        return Graph.from_edges(n, read_edge_list(init[5:]))
    raise ValueError(f"unknown graph initializer {init!r}")


def read_edge_list(path) -> list[tuple[int, int]]:
    """Parse an edge-list file: one `u v` pair per line, 0-indexed.

    Blank lines and lines starting with '#' are ignored.
    """
    edges: list[tuple[int, int]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {text!r}")
            edges.append((int(parts[0]), int(parts[1])))
    return edges


def evolve(g: Graph, params: EdgeMarkovParams, rng: np.random.Generator) -> Graph:
    """Advance the graph one step: per unordered pair, an absent pair appears
    with probability p and a present edge survives with probability 1-q.
    Exactly one uniform draw is consumed per pair."""
    n = g.n
    iu, iv = _pair_indices(n)
    u = rng.random(iu.size)
    cur = g.adj[iu, iv]
    nxt = np.where(cur, u >= params.q, u < params.p)
    adj = np.zeros((n, n), dtype=bool)
    adj[iu, iv] = nxt
    adj[iv, iu] = nxt
    return Graph._wrap(n, adj)


def degree(g: Graph, v: int) -> int:
    return g.degree(v)


def stationary_edge_probability(params: EdgeMarkovParams) -> float:
    return params.stationary_density


def mixing_steps(params: EdgeMarkovParams, eps: float) -> int:
    """Steps after which any start of the pair chain is within total
    variation eps of stationarity.

    This is the smallest integer t with |1-p-q|**t <= eps. When p+q = 1
    the chain lands exactly on the stationary law after a single step and
    the formula's limiting value is likewise 1.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"tolerance must be in (0, 1), got {eps}")
    lam = abs(1.0 - params.p - params.q)
    if lam == 0.0:
        return 1
    return max(1, math.ceil(math.log(eps) / math.log(lam)))
