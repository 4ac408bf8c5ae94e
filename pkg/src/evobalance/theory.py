"""Closed-form bounds and deterministic counting checks.

The balancing-time guarantee for an F-fair matcher on the birth/death graph
process is (90 r / (c_star(theta) F)) ln(Delta n / eps) + 2 steps with
probability at least 1 - eps, split into a phase that collapses the maximum
(the 36 coefficient) and a phase that lifts the minimum (the 54). All
logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .balance import TokenConfig, nearest_int

__all__ = [
    "BoundInputs",
    "TheoremBound",
    "r_factor",
    "c_star",
    "theorem_bound",
    "low_side_count_ok",
    "near_balanced",
    "low_side_exhaustive",
    "near_balanced_exhaustive",
]


def r_factor(p: float, q: float) -> float:
    """max{p/(1-q), (1-q)/p}: the parameter-asymmetry penalty, at least 1."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"birth probability p must be in (0, 1], got {p}")
    if not 0.0 <= q < 1.0:
        raise ValueError(f"death probability q must be in [0, 1), got {q}")
    return max(p / (1.0 - q), (1.0 - q) / p)


def c_star(theta: float) -> float:
    """(1 - exp(-theta/3))^2 / (2 + 1/theta).

    Increases from 0 at theta -> 0+ to 1/2 as theta -> infinity.
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    return (1.0 - math.exp(-theta / 3.0)) ** 2 / (2.0 + 1.0 / theta)


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the balancing-time bound.

    theta defaults to min(1, n max{p, 1-q}), the largest value at most 1
    admissible under the hypothesis theta <= n max{p, 1-q}. fairness is the
    matcher's floor constant F in (0, 1].
    """

    n: int
    delta: int
    p: float
    q: float
    fairness: float
    eps: float = 0.25
    theta: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one vertex, got n={self.n}")
        r_factor(self.p, self.q)  # validates p, q
        if not 0.0 < self.fairness <= 1.0:
            raise ValueError(f"fairness floor must be in (0, 1], got {self.fairness}")
        if not 0.0 < self.eps <= 0.25:
            raise ValueError(f"eps must be in (0, 1/4], got {self.eps}")
        cap = self.n * max(self.p, 1.0 - self.q)
        if self.theta is None:
            object.__setattr__(self, "theta", min(1.0, cap))
        if not 0.0 < self.theta <= cap:
            raise ValueError(
                f"theta must be in (0, n max(p, 1-q)] = (0, {cap}], got {self.theta}")


@dataclass(frozen=True)
class TheoremBound:
    """Step bounds: t1 + t2 + 2 suffices with probability >= 1 - eps.

    t1_raw and t2_raw are the pre-ceiling values (36 x and 54 x for the
    shared factor x = (r / (c_star F)) ln(Delta n / eps)).
    """

    t1: int
    t2: int
    t1_raw: float
    t2_raw: float

    @property
    def total(self) -> int:
        return self.t1 + self.t2 + 2


def theorem_bound(inputs: BoundInputs) -> TheoremBound:
    """Evaluate the balancing-time bound; requires delta >= 2."""
    if inputs.delta < 2:
        raise ValueError(
            f"the bound needs initial discrepancy at least 2, got {inputs.delta}")
    r = r_factor(inputs.p, inputs.q)
    x = (r / (c_star(inputs.theta) * inputs.fairness)) * math.log(
        inputs.delta * inputs.n / inputs.eps)
    return TheoremBound(t1=math.ceil(36.0 * x), t2=math.ceil(54.0 * x),
                        t1_raw=36.0 * x, t2_raw=54.0 * x)


def low_side_count_ok(c: TokenConfig) -> bool | None:
    """At least n/3 vertices sit at or below the nearest-integer mean.

    Valid whenever the minimum load is at least mu - 1; returns None when
    that hypothesis fails instead of judging the conclusion.
    """
    loads = c.loads
    n, k = c.n, c.total
    if int(loads.min()) * n < k - n:  # min < mu - 1, exact arithmetic
        return None
    m = nearest_int(Fraction(k, n))
    return bool(3 * int((loads <= m).sum()) >= n)


def near_balanced(load: int, total: int, n: int) -> bool:
    """Either the load or its complement is within the almost-tight window.

    Evaluates [mu - 1 <= load <= m + 1] or [mubar - 1 <= total - load
    <= mbar + 1] exactly, with m, mbar the nearest integers to the mean
    load mu = total/n and mean complementary load mubar = total (n-1)/n.
    Either clause forces load into {m - 1, m, m + 1}.
    """
    if not 0 <= load <= total:
        raise ValueError(f"load must lie in 0..{total}, got {load}")
    mu = Fraction(total, n)
    m = nearest_int(mu)
    if mu - 1 <= load <= m + 1:
        return True
    mubar = Fraction(total * (n - 1), n)
    mbar = nearest_int(mubar)
    return mubar - 1 <= total - load <= mbar + 1


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def low_side_exhaustive(n_max: int = 6, k_max: int = 18) -> int:
    """Check 3 |S'| >= n over every small config meeting the hypothesis.

    S' is the set of vertices with load at most the nearest-integer mean.
    Returns the number of hypothesis-satisfying configurations checked.
    """
    checked = 0
    for n in range(1, n_max + 1):
        for k in range(0, k_max + 1):
            for loads in _compositions(k, n):
                if min(loads) * n < k - n:
                    continue
                m = nearest_int(Fraction(k, n))
                if 3 * sum(1 for g in loads if g <= m) < n:
                    raise AssertionError(
                        f"low-side count fails for loads={loads}")
                checked += 1
    return checked


def near_balanced_exhaustive(n_max: int = 6, k_max: int = 24) -> int:
    """Check that near_balanced implies membership in the three-value band.

    Returns the number of (load, total, n) triples checked.
    """
    checked = 0
    for n in range(1, n_max + 1):
        for k in range(0, k_max + 1):
            m = nearest_int(Fraction(k, n))
            for load in range(0, k + 1):
                if near_balanced(load, k, n) and not m - 1 <= load <= m + 1:
                    raise AssertionError(
                        f"near_balanced admits load={load} outside the band "
                        f"for total={k}, n={n}")
                checked += 1
    return checked
