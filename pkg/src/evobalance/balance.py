"""Token configurations and the randomized averaging update.

A configuration assigns a nonnegative integer load to each vertex. Applying
a matching replaces each matched pair's loads by the ceiling/floor split of
their sum, with a fair coin deciding which endpoint receives the ceiling.
The terminal predicate accepts configurations whose loads all lie within
one of the nearest integer to the mean, computed in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .matchers import Matching

__all__ = [
    "TokenConfig",
    "RoundingChoices",
    "initial_config",
    "read_loads",
    "nearest_int",
    "discrepancy",
    "apply_matching",
    "is_balanced",
    "balance_band",
]


@dataclass(frozen=True)
class TokenConfig:
    """Immutable per-vertex token counts."""

    loads: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.loads, dtype=np.int64)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("loads must be a nonempty one-dimensional array")
        if (a < 0).any():
            raise ValueError("loads must be nonnegative")
        if a is not self.loads or a.flags.writeable:
            a = a.copy()
            a.flags.writeable = False
            object.__setattr__(self, "loads", a)

    @property
    def n(self) -> int:
        return self.loads.size

    @property
    def total(self) -> int:
        """K, the conserved token count."""
        return int(self.loads.sum())

    @property
    def mean(self) -> Fraction:
        """mu = K/n as an exact rational."""
        return Fraction(self.total, self.n)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TokenConfig):
            return NotImplemented
        return np.array_equal(self.loads, other.loads)


@dataclass(frozen=True)
class RoundingChoices:
    """Coin record for one update: per matched edge (lo, hi), lo_gets_ceil
    says whether the lower-indexed endpoint received the ceiling half."""

    edges: tuple[tuple[int, int], ...]
    lo_gets_ceil: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.lo_gets_ceil):
            raise ValueError("need exactly one coin per matched edge")

    def __len__(self) -> int:
        return len(self.edges)


def read_loads(path) -> list[int]:
    """Read a load file: one integer per line, vertex order 0..n-1."""
    out: list[int] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                out.append(int(text))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not an integer: {text!r}") from None
    return out


def initial_config(spec, n: int) -> TokenConfig:
    """Build a starting configuration on n vertices.

    String forms:
      point:K            all K tokens on vertex 0
      two-level:lo,hi,c  c vertices at hi (lowest indices), the rest at lo
      uniform:K,seed     K tokens thrown uniformly at random (own seed, so
                         trial reproducibility does not depend on n)
      file:PATH          one integer per line
    A sequence of integers is used directly.
    """
    if n < 1:
        raise ValueError(f"need at least one vertex, got n={n}")
    if isinstance(spec, TokenConfig):
        if spec.n != n:
            raise ValueError(f"config has {spec.n} vertices, expected {n}")
        return spec
    if not isinstance(spec, str):
        loads = list(spec)
        if len(loads) != n:
            raise ValueError(f"got {len(loads)} loads for n={n} vertices")
        return TokenConfig(np.array(loads, dtype=np.int64))
    head, sep, rest = spec.partition(":")
    if not sep:
        raise ValueError(f"malformed load spec {spec!r}")
    if head == "point":
        k = int(rest)
        if k < 0:
            raise ValueError(f"point mass must be nonnegative, got {k}")
        loads = np.zeros(n, dtype=np.int64)
        loads[0] = k
        return TokenConfig(loads)
    if head == "two-level":
        lo, hi, count = (int(x) for x in rest.split(","))
        if not 0 <= count <= n:
            raise ValueError(f"high-vertex count {count} outside 0..{n}")
        if lo < 0 or hi < 0:
            raise ValueError("two-level loads must be nonnegative")
        loads = np.full(n, lo, dtype=np.int64)
        loads[:count] = hi
        return TokenConfig(loads)
    if head == "uniform":
        k, seed = (int(x) for x in rest.split(","))
        if k < 0:
            raise ValueError(f"token count must be nonnegative, got {k}")
        rng = np.random.default_rng(seed)
        loads = rng.multinomial(k, np.full(n, 1.0 / n))
        return TokenConfig(loads.astype(np.int64))
    if head == "file":
        loads = read_loads(rest)
        if len(loads) != n:
            raise ValueError(f"{rest}: found {len(loads)} loads for n={n} vertices")
        return TokenConfig(np.array(loads, dtype=np.int64))
    raise ValueError(f"unknown load spec kind {head!r}")


def nearest_int(x) -> int:
    """Round half down: ceil(x - 1/2), evaluated exactly.

    Accepts integers and Fractions. Floats are rejected: the balance test
    is a strict integer-set membership and must not inherit rounding error.
    """
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        num = 2 * x.numerator - x.denominator
        den = 2 * x.denominator
        return -((-num) // den)
    raise TypeError(f"need an exact rational, got {type(x).__name__}")


def discrepancy(c: TokenConfig) -> int:
    """Max load minus min load."""
    return int(c.loads.max() - c.loads.min())


def balance_band(total: int, n: int) -> tuple[int, int, int]:
    """(m-1, m, m+1) with m the nearest integer to total/n."""
    m = nearest_int(Fraction(total, n))
    return m - 1, m, m + 1


def is_balanced(c: TokenConfig) -> bool:
    """True iff every load lies within one of the nearest integer to the mean."""
    lo, _, hi = balance_band(c.total, c.n)
    return bool((c.loads >= lo).all() and (c.loads <= hi).all())


def _split_pairs(lo_sum: np.ndarray, coins: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ceiling/floor halves of pair sums, assigned by the coins."""
    ceil = (lo_sum + 1) >> 1
    floor = lo_sum >> 1
    return np.where(coins, ceil, floor), np.where(coins, floor, ceil)


def apply_matching(c: TokenConfig, m: "Matching | np.ndarray",
                   rng: np.random.Generator) -> tuple[TokenConfig, RoundingChoices]:
    """One averaging step over the matched pairs.

    Each matched pair's loads become the ceiling/floor split of their sum;
    a fair coin per edge (drawn in ascending edge order) decides which side
    gets the ceiling. Unmatched vertices keep their loads. Returns the new
    configuration and the coin record.
    """
    edges = m if isinstance(m, np.ndarray) else np.array(
        [e for e in m], dtype=np.int64).reshape(-1, 2)
    if edges.size:
        if edges.min() < 0 or edges.max() >= c.n:
            raise ValueError("matching references vertices outside the configuration")
        if (edges[:, 0] >= edges[:, 1]).any():
            raise ValueError("matching edges must be ascending pairs")
        if np.unique(edges).size != edges.size:
            raise ValueError("matching reuses a vertex")
    coins = rng.random(edges.shape[0]) < 0.5
    loads = c.loads.copy()
    if edges.size:
        el, eh = edges[:, 0], edges[:, 1]
        s = loads[el] + loads[eh]
        loads[el], loads[eh] = _split_pairs(s, coins)
    out = TokenConfig(loads)
    m_edges = tuple((int(a), int(b)) for a, b in edges)
    return out, RoundingChoices(m_edges, tuple(bool(x) for x in coins))
