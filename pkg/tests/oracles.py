"""Reference oracles for the test suite.

Everything here is derived from first principles (exact enumeration, brute
force, or high-precision arithmetic) and is deliberately independent of the
evobalance implementation: no imports from the package. Tests compare library
output against these.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------------------
# tiny-graph plumbing
# ---------------------------------------------------------------------------

def neighbors(n: int, edges) -> list[list[int]]:
    nbr: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        nbr[u].append(v)
        nbr[v].append(u)
    for lst in nbr:
        lst.sort()
    return nbr


def degrees(n: int, edges) -> list[int]:
    return [len(a) for a in neighbors(n, edges)]


# ---------------------------------------------------------------------------
# exact edge-inclusion probabilities for the four matching generators
# ---------------------------------------------------------------------------

def simple_inclusion(n: int, edges) -> dict[tuple[int, int], Fraction]:
    """Pick a vertex uniformly, then a uniform neighbor (if any)."""
    deg = degrees(n, edges)
    out = {}
    for u, v in edges:
        out[(u, v)] = Fraction(1, n) * (Fraction(1, deg[u]) + Fraction(1, deg[v]))
    return out


def uniform_edge_inclusion(n: int, edges) -> dict[tuple[int, int], Fraction]:
    m = len(edges)
    return {(u, v): Fraction(1, m) for u, v in edges}


def lr_resolve(proposals: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """Conflict removal and keep rule of the local randomized generator.

    Input: a set of directed proposals. Drop all out-edges of any vertex with
    out-degree > 1, then all in-edges of any vertex with in-degree > 1 on the
    reduced set. Keep (v,u) as the undirected edge {v,u} when v has in-degree
    0 on the final set, or when the reverse proposal also survived.
    """
    outdeg: dict[int, int] = {}
    for v, _ in proposals:
        outdeg[v] = outdeg.get(v, 0) + 1
    p2 = {(v, u) for (v, u) in proposals if outdeg[v] <= 1}
    indeg: dict[int, int] = {}
    for _, u in p2:
        indeg[u] = indeg.get(u, 0) + 1
    p3 = {(v, u) for (v, u) in p2 if indeg[u] <= 1}
    indeg3: dict[int, int] = {}
    for _, u in p3:
        indeg3[u] = indeg3.get(u, 0) + 1
    kept = set()
    for v, u in p3:
        if indeg3.get(v, 0) == 0 or (u, v) in p3:
            kept.add((min(v, u), max(v, u)))
    return kept


def lr_inclusion(n: int, edges) -> dict[tuple[int, int], Fraction]:
    """Enumerate every outcome of the per-ordered-pair proposal coins."""
    deg = degrees(n, edges)
    pairs = []
    for u, v in edges:
        pairs.append((u, v))
        pairs.append((v, u))
    coin = {
        (v, u): Fraction(1, 8 * max(deg[v], deg[u])) for (v, u) in pairs
    }
    out = {(u, v): Fraction(0) for u, v in edges}
    for outcome in itertools.product((False, True), repeat=len(pairs)):
        prob = Fraction(1)
        proposals = set()
        for flag, pair in zip(outcome, pairs):
            prob *= coin[pair] if flag else 1 - coin[pair]
            if flag:
                proposals.add(pair)
        for e in lr_resolve(proposals):
            out[e] += prob
    return out


def ds_keep(proposals: set[tuple[int, int]], initiators: set[int]) -> set[tuple[int, int]]:
    """Keep rule of the distributed synchronous variant: (v,u) survives when
    u is not an initiator and u received exactly one proposal."""
    indeg: dict[int, int] = {}
    for _, u in proposals:
        indeg[u] = indeg.get(u, 0) + 1
    kept = set()
    for v, u in proposals:
        if u not in initiators and indeg[u] == 1:
            kept.add((min(v, u), max(v, u)))
    return kept


def ds_inclusion(n: int, edges) -> dict[tuple[int, int], Fraction]:
    """Enumerate initiator sets, partner choices and acceptance coins."""
    nbr = neighbors(n, edges)
    deg = [len(a) for a in nbr]
    out = {(u, v): Fraction(0) for u, v in edges}
    half = Fraction(1, 2)
    for bits in itertools.product((False, True), repeat=n):
        initiators = {v for v in range(n) if bits[v]}
        p_init = half ** n
        active = [v for v in initiators if deg[v] > 0]
        # per-initiator options: propose (v,u) with prob (1/deg v) * accept,
        # or end up proposing nothing (all the rejected branches pooled)
        options = []
        for v in active:
            opts = []
            none_prob = Fraction(0)
            for u in nbr[v]:
                accept = Fraction(min(deg[u], deg[v]), deg[u])
                opts.append(((v, u), Fraction(1, deg[v]) * accept))
                none_prob += Fraction(1, deg[v]) * (1 - accept)
            if none_prob:
                opts.append((None, none_prob))
            options.append(opts)
        for combo in itertools.product(*options):
            prob = p_init
            proposals = set()
            for choice, p in combo:
                prob *= p
                if choice is not None:
                    proposals.add(choice)
            if prob == 0:
                continue
            for e in ds_keep(proposals, initiators):
                out[e] += prob
    return out


# ---------------------------------------------------------------------------
# two-state chain (single vertex pair under the edge dynamics)
# ---------------------------------------------------------------------------

def pair_chain_tv(p: float, q: float, t: int, start: int) -> float:
    """Total-variation distance to stationarity after t steps from state
    start (0 = absent, 1 = present), by direct matrix powering."""
    P = np.array([[1 - p, p], [q, 1 - q]], dtype=float)
    dist = np.linalg.matrix_power(P, t)[start]
    pi = np.array([q / (p + q), p / (p + q)])
    return 0.5 * float(np.abs(dist - pi).sum())


def time_average_sigma(var0: float, lam: float, steps: int, chains: int) -> float:
    """Std dev of the grand mean of `chains` independent stationary two-state
    chains averaged over `steps` consecutive steps, each chain having
    per-step variance var0 and autocorrelation lam**d at lag d."""
    d = np.arange(1, steps)
    s = steps + 2.0 * np.sum((steps - d) * lam ** d)
    return float(np.sqrt(var0 * s / steps**2 / chains))


# ---------------------------------------------------------------------------
# exact rounding / band arithmetic
# ---------------------------------------------------------------------------

def nearest_int_brute(num: int, den: int) -> int:
    """ceil(num/den - 1/2) in pure integer arithmetic (den > 0)."""
    a, b = 2 * num - den, 2 * den
    return -((-a) // b)


def balanced_band_ref(loads) -> bool:
    K, n = sum(loads), len(loads)
    m = nearest_int_brute(K, n)
    return all(m - 1 <= x <= m + 1 for x in loads)


# ---------------------------------------------------------------------------
# token movement re-derived from the reallocation cases
# ---------------------------------------------------------------------------

def token_move_ref(h: int, low: int, case_one: bool) -> tuple[bool, int]:
    """Destination of a mover token: h is its height, low the matched pair's
    smaller load. Returns (stays on the bigger pile, new height). Case one is
    the rounding branch where the bigger pile keeps the ceiling."""
    d = h - low
    assert d >= 1
    k = (d + 1) // 2
    odd = d % 2 == 1
    return (odd if case_one else not odd), low + k


# ---------------------------------------------------------------------------
# configuration sweeps
# ---------------------------------------------------------------------------

def compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# high-precision theorem-bound evaluation
# ---------------------------------------------------------------------------

def bound_oracle(n: int, delta: int, eps, r, c_star, fairness) -> tuple[int, int]:
    """(t1, t2) recomputed with 50-digit arithmetic."""
    import mpmath as mp

    with mp.workdps(50):
        x = mp.log(mp.mpf(delta) * n / mp.mpf(eps)) * mp.mpf(r) / (
            mp.mpf(c_star) * mp.mpf(fairness)
        )
        return int(mp.ceil(36 * x)), int(mp.ceil(54 * x))


def c_star_oracle(theta) -> float:
    import mpmath as mp

    with mp.workdps(50):
        th = mp.mpf(theta)
        return float((1 - mp.e ** (-th / 3)) ** 2 / (2 + 1 / th))


# ---------------------------------------------------------------------------
# matching validity over partner-array batches
# ---------------------------------------------------------------------------

def partners_violations(adj, parts) -> int:
    """Count invariant violations over a batch of partner rows.

    adj: (n, n) boolean adjacency. parts: (S, n) integer partner rows with
    -1 for unmatched. Checks self-matching, mutuality (partner of partner is
    the vertex itself) and that every matched pair is an actual edge.
    """
    adj = np.asarray(adj, dtype=bool)
    parts = np.asarray(parts)
    s, n = parts.shape
    idx = np.arange(n)
    matched = parts >= 0
    safe = np.where(matched, parts, 0)
    bad_self = matched & (parts == idx)
    back = np.take_along_axis(parts, safe, axis=1)
    bad_mutual = matched & (back != idx)
    bad_edge = matched & ~adj[idx[None, :], safe]
    return int(bad_self.sum() + bad_mutual.sum() + bad_edge.sum())
