"""Randomized matching generators with per-edge fairness guarantees.

Four one-round samplers, each returning a matching of the current graph:

* simple: pick a uniform vertex, then a uniform neighbor, output that edge.
* uniform-edge: pick one edge uniformly at random.
* lr: every ordered adjacent pair proposes independently with probability
  1/(8 max{deg v, deg u}); proposals of busy senders are removed, then
  proposals onto busy receivers, and a surviving proposal is kept when its
  sender receives nothing or the reverse proposal also survived.
* ds: each vertex independently becomes an initiator with probability 1/2,
  initiators propose to a uniform neighbor u with acceptance probability
  min{deg u, deg v}/deg u, and a proposal is kept when its target is not an
  initiator and received exactly that one proposal.

Every sampler guarantees edge inclusion probability at least
fairness_floor(kind, n) divided by the maximum degree.

The samplers are vectorized over independent repetitions: kernels return
partner arrays of shape (count, n) with -1 for unmatched vertices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .evolving_graph import Graph

__all__ = [
    "MatcherKind",
    "Matching",
    "MatcherContext",
    "matching_from_partners",
    "check_matching",
    "sample_partners",
    "draw_matching",
    "simple_matching",
    "uniform_edge_matching",
    "lr_matching",
    "ds_matching",
    "fairness_floor",
    "estimate_edge_inclusion",
    "estimate_all_edges",
]

# soft cap on scratch-array elements per kernel call; larger requests are
# served in chunks so memory stays flat while throughput stays vectorized
_MAX_ELEMS = 1 << 23


class MatcherKind(enum.Enum):
    SIMPLE = "simple"
    UNIFORM_EDGE = "uniform-edge"
    LR = "lr"
    DS = "ds"

    @classmethod
    def from_tag(cls, tag: "str | MatcherKind") -> "MatcherKind":
        if isinstance(tag, MatcherKind):
            return tag
        for kind in cls:
            if kind.value == tag:
                return kind
        raise ValueError(f"unknown matcher {tag!r}; expected one of "
                         f"{[k.value for k in cls]}")


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint edges, stored as sorted (lo, hi) pairs."""

    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        prev = None
        for u, v in self.edges:
            if not u < v:
                raise ValueError(f"matching edge ({u}, {v}) must satisfy u < v")
            if prev is not None and (u, v) <= prev:
                raise ValueError("matching edges must be sorted and distinct")
            prev = (u, v)
            if u in seen or v in seen:
                raise ValueError(f"matching edge ({u}, {v}) reuses a vertex")
            seen.add(u)
            seen.add(v)

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.edges)

    def __contains__(self, edge: tuple[int, int]) -> bool:
        u, v = edge
        return (min(u, v), max(u, v)) in self.edges

    def vertices(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)

    def partner_of(self, v: int) -> int | None:
        for a, b in self.edges:
            if a == v:
                return b
            if b == v:
                return a
        return None


def matching_from_partners(row: np.ndarray) -> Matching:
    """Convert one partner row (n,) into a Matching value."""
    idx = np.flatnonzero(row >= 0)
    lo = idx[row[idx] > idx]
    return Matching(tuple((int(v), int(row[v])) for v in lo))


def check_matching(g: Graph, m: Matching) -> None:
    """Raise ValueError unless every matching edge exists in g.

    Disjointness and ordering are already enforced by the Matching type, so
    this completes the validity check against a concrete graph.
    """
    for u, v in m:
        if not (0 <= u < g.n and 0 <= v < g.n):
            raise ValueError(f"matching edge ({u}, {v}) is out of range for n={g.n}")
        if not g.adj[u, v]:
            raise ValueError(f"matching edge ({u}, {v}) is not an edge of the graph")


class MatcherContext:
    """Per-graph arrays shared by the sampling kernels.

    Building one context per time step amortizes the degree, neighbor-list
    and edge-list extraction across all matchings drawn from that graph.
    """

    def __init__(self, g: Graph):
        self.graph = g
        self.n = g.n
        self.deg = g.degrees()
        rows, cols = np.nonzero(g.adj)
        self.nbr_flat = cols  # row-major, so per-vertex slices are contiguous
        self.nbr_off = np.zeros(g.n + 1, dtype=np.int64)
        np.cumsum(self.deg, out=self.nbr_off[1:])
        self.edges = g.edges()
        self.edge_count = self.edges.shape[0]

    @cached_property
    def lr_threshold(self) -> np.ndarray:
        """(n, n) proposal probabilities 1/(8 max{deg v, deg u}), zero off-edge."""
        big = np.maximum(self.deg[:, None], self.deg[None, :])
        with np.errstate(divide="ignore"):
            thr = np.where(self.graph.adj, 1.0 / (8.0 * np.maximum(big, 1)), 0.0)
        return thr


def _pick_neighbor(ctx: MatcherContext, v: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Uniform neighbor of each v given uniforms r; garbage where deg v = 0."""
    dv = ctx.deg[v]
    j = np.minimum((r * dv).astype(np.int64), np.maximum(dv - 1, 0))
    idx = np.minimum(ctx.nbr_off[v] + j, ctx.nbr_flat.size - 1)
    return ctx.nbr_flat[idx]


def _simple_kernel(ctx: MatcherContext, rng: np.random.Generator,
                   count: int) -> np.ndarray:
    out = np.full((count, ctx.n), -1, dtype=np.int32)
    v = rng.integers(0, ctx.n, size=count)
    r = rng.random(count)
    if ctx.edge_count == 0:
        return out
    u = _pick_neighbor(ctx, v, r)
    act = ctx.deg[v] > 0
    rows = np.flatnonzero(act)
    out[rows, v[act]] = u[act]
    out[rows, u[act]] = v[act]
    return out


def _uniform_edge_kernel(ctx: MatcherContext, rng: np.random.Generator,
                         count: int) -> np.ndarray:
    out = np.full((count, ctx.n), -1, dtype=np.int32)
    if ctx.edge_count == 0:
        return out
    e = ctx.edges[rng.integers(0, ctx.edge_count, size=count)]
    rows = np.arange(count)
    out[rows, e[:, 0]] = e[:, 1]
    out[rows, e[:, 1]] = e[:, 0]
    return out


def _lr_resolve(proposals: np.ndarray) -> np.ndarray:
    """Resolve a batch of directed proposal matrices (count, n, n) -> partners.

    First drop every proposal of a sender with out-degree above one, then
    every proposal onto a receiver whose in-degree is above one in the
    reduced set. A survivor (v, u) becomes a matched edge when v receives no
    surviving proposal or (u, v) also survived.
    """
    p = proposals
    p = p & (p.sum(axis=2) <= 1)[:, :, None]
    p = p & (p.sum(axis=1) <= 1)[:, None, :]
    lonely = p.sum(axis=1) == 0
    keep = (p & lonely[:, :, None]) | (p & p.transpose(0, 2, 1))
    sym = keep | keep.transpose(0, 2, 1)
    part = sym.argmax(axis=2).astype(np.int32)
    part[~sym.any(axis=2)] = -1
    return part


def _lr_kernel(ctx: MatcherContext, rng: np.random.Generator,
               count: int) -> np.ndarray:
    u = rng.random((count, ctx.n, ctx.n))
    return _lr_resolve(u < ctx.lr_threshold)


def _ds_resolve(initiator: np.ndarray, target: np.ndarray,
                proposed: np.ndarray) -> np.ndarray:
    """Resolve accepted proposals (count, n) -> partners.

    A proposal from v onto target[v] is kept when the target is not an
    initiator and received exactly one proposal overall.
    """
    count, n = initiator.shape
    flat = np.arange(count)[:, None] * n + target
    indeg = np.bincount(flat[proposed], minlength=count * n).reshape(count, n)
    init_t = np.take_along_axis(initiator, target, axis=1)
    ind_t = np.take_along_axis(indeg, target, axis=1)
    keep = proposed & ~init_t & (ind_t == 1)
    out = np.full((count, n), -1, dtype=np.int32)
    rows, cols = np.nonzero(keep)
    t = target[rows, cols]
    out[rows, cols] = t
    out[rows, t] = cols
    return out


def _ds_kernel(ctx: MatcherContext, rng: np.random.Generator,
               count: int) -> np.ndarray:
    n = ctx.n
    initiator = rng.random((count, n)) < 0.5
    rsel = rng.random((count, n))
    racc = rng.random((count, n))
    if ctx.edge_count == 0:
        return np.full((count, n), -1, dtype=np.int32)
    vs = np.broadcast_to(np.arange(n), (count, n))
    target = _pick_neighbor(ctx, vs, rsel)
    degt = ctx.deg[target]
    acc = racc < np.minimum(degt, ctx.deg) / np.maximum(degt, 1)
    proposed = initiator & (ctx.deg > 0) & acc
    return _ds_resolve(initiator, target, proposed)


_KERNELS = {
    MatcherKind.SIMPLE: _simple_kernel,
    MatcherKind.UNIFORM_EDGE: _uniform_edge_kernel,
    MatcherKind.LR: _lr_kernel,
    MatcherKind.DS: _ds_kernel,
}


def _chunk_size(kind: MatcherKind, n: int) -> int:
    per = n * n if kind is MatcherKind.LR else n
    return max(1, _MAX_ELEMS // max(per, 1))


def sample_partners(kind: "MatcherKind | str", g: "Graph | MatcherContext",
                    rng: np.random.Generator, count: int = 1) -> np.ndarray:
    """Draw `count` independent matchings, returned as (count, n) partner rows.

    Materializes the full result, so memory grows with count * n; the
    estimators below stream in chunks instead when only counts are needed.
    """
    kind = MatcherKind.from_tag(kind)
    ctx = g if isinstance(g, MatcherContext) else MatcherContext(g)
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    kernel = _KERNELS[kind]
    step = _chunk_size(kind, ctx.n)
    if count <= step:
        return kernel(ctx, rng, count)
    out = np.empty((count, ctx.n), dtype=np.int32)
    for start in range(0, count, step):
        stop = min(start + step, count)
        out[start:stop] = kernel(ctx, rng, stop - start)
    return out


def draw_matching(kind: "MatcherKind | str", g: Graph,
                  rng: np.random.Generator) -> Matching:
    return matching_from_partners(sample_partners(kind, g, rng, 1)[0])


def simple_matching(g: Graph, rng: np.random.Generator) -> Matching:
    """Uniform vertex, then uniform neighbor; empty if the vertex is isolated."""
    return draw_matching(MatcherKind.SIMPLE, g, rng)


def uniform_edge_matching(g: Graph, rng: np.random.Generator) -> Matching:
    """One uniformly random edge; empty on an edgeless graph."""
    return draw_matching(MatcherKind.UNIFORM_EDGE, g, rng)


def lr_matching(g: Graph, rng: np.random.Generator) -> Matching:
    """Local proposal round with busy-sender and busy-receiver elimination."""
    return draw_matching(MatcherKind.LR, g, rng)


def ds_matching(g: Graph, rng: np.random.Generator) -> Matching:
    """Initiator coin, neighbor proposal, degree-ratio acceptance."""
    return draw_matching(MatcherKind.DS, g, rng)


def fairness_floor(kind: "MatcherKind | str", n: int) -> float:
    """Graph-independent constant F with P[e in M] >= F / max degree
    for every edge e of every n-vertex graph."""
    kind = MatcherKind.from_tag(kind)
    if n < 1:
        raise ValueError(f"need at least one vertex, got n={n}")
    if kind is MatcherKind.SIMPLE:
        return 1.0 / n
    if kind is MatcherKind.UNIFORM_EDGE:
        return 1.0 / (n * n)
    if kind is MatcherKind.LR:
        return 1.0 / 8.0
    return 1.0 / 4.0


def estimate_all_edges(kind: "MatcherKind | str", g: Graph, samples: int,
                       rng: np.random.Generator
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Monte Carlo inclusion probability for every edge from one shared pool.

    Returns (edges, estimate, standard_error) with edges in lexicographic
    (lo, hi) order. Sampling streams in chunks, so memory is independent of
    the sample count.
    """
    kind = MatcherKind.from_tag(kind)
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    ctx = MatcherContext(g)
    kernel = _KERNELS[kind]
    counts = np.zeros(ctx.edge_count, dtype=np.int64)
    step = _chunk_size(kind, ctx.n)
    done = 0
    while done < samples:
        take = min(step, samples - done)
        part = kernel(ctx, rng, take)
        if ctx.edge_count:
            hits = part[:, ctx.edges[:, 0]] == ctx.edges[:, 1]
            counts += hits.sum(axis=0)
        done += take
    est = counts / samples
    se = np.sqrt(est * (1.0 - est) / samples)
    return ctx.edges.copy(), est, se


def estimate_edge_inclusion(kind: "MatcherKind | str", g: Graph,
                            edge: tuple[int, int], samples: int,
                            rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate and standard error of P[edge in M]."""
    u, v = min(edge), max(edge)
    if not g.adj[u, v]:
        raise ValueError(f"({u}, {v}) is not an edge of the graph")
    edges, est, se = estimate_all_edges(kind, g, samples, rng)
    i = int(np.flatnonzero((edges[:, 0] == u) & (edges[:, 1] == v))[0])
    return float(est[i]), float(se[i])
