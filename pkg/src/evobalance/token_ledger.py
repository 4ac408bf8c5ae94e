"""Labeled-token instrumentation for the averaging dynamics.

Every unit of load is a named token sitting at an integer height in its
vertex's pile, so that vertex v holds heights {1, ..., loads[v]} exactly.
A mirrored family of complementary tokens (K - loads[v] per vertex, with
inverted heights) tracks the minimum side symmetrically.

When a matched pair averages its piles, tokens at or below the smaller pile
stay put; each higher token on the bigger pile drops to height
low + ceil(d/2) where d is its height above the smaller pile, and the
rounding case decides by the parity of d whether it stays or crosses to the
partner. Heights never increase under this rule, and the height drop equals
the halved gap exactly; both facts are machine-checked per step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .balance import RoundingChoices, TokenConfig
from .matchers import Matching

__all__ = [
    "LedgerViolation",
    "TokenLedger",
    "init_ledger",
    "advance_ledger",
    "move_height",
    "verify_halved_bound",
    "check_ledger",
    "verify_step",
    "halved_bound_exhaustive",
    "dump_trace",
]


class LedgerViolation(Exception):
    """An instrumented run broke a ledger invariant."""


@dataclass(frozen=True)
class TokenLedger:
    """Places and heights of the K tokens and K(n-1) complementary tokens.

    Token i of the primary family is at height height[i] on vertex place[i];
    complementary token j is at inverted height cheight[j] on cplace[j]. The
    non-inverted height of a complementary token is K + 1 - cheight[j].
    """

    n: int
    total: int
    place: np.ndarray
    height: np.ndarray
    cplace: np.ndarray
    cheight: np.ndarray

    def loads_from_tokens(self) -> np.ndarray:
        return np.bincount(self.place, minlength=self.n).astype(np.int64)

    def complementary_counts(self) -> np.ndarray:
        return np.bincount(self.cplace, minlength=self.n).astype(np.int64)

    def complementary_heights(self) -> np.ndarray:
        """Non-inverted heights K + 1 - inverted height."""
        return self.total + 1 - self.cheight


def _stack(loads: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Assign places and heights 1..loads[v] in vertex and label order."""
    total = int(loads.sum())
    place = np.repeat(np.arange(loads.size, dtype=np.int32), loads)
    starts = np.repeat(np.cumsum(loads) - loads, loads)
    height = np.arange(total, dtype=np.int64) - starts + 1
    return place, height


def init_ledger(c: TokenConfig) -> TokenLedger:
    """Stack tokens deterministically: vertex v gets heights 1..loads[v]."""
    place, height = _stack(c.loads)
    cplace, cheight = _stack(c.total - c.loads)
    return TokenLedger(c.n, c.total, place, height, cplace, cheight)


def move_height(h: int, low: int, case_one: bool) -> tuple[bool, int]:
    """Reallocation rule for one token on the bigger pile of its family.

    `low` is the smaller pile's size. Tokens at or below `low` stay as they
    are. A higher token with gap d = h - low lands at height low + ceil(d/2);
    under case one it stays on its current vertex exactly when d is odd,
    under case two exactly when d is even. Returns (stays, new_height).
    """
    if h <= low:
        return True, h
    d = h - low
    stays = (d % 2 == 1) == case_one
    return stays, low + (d + 1) // 2


def _case_one_flags(loads: np.ndarray, choices: RoundingChoices) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex partner (-1 if unmatched) and case-one flag for the update.

    Case one is the branch where the endpoint with the (weakly) larger load
    receives the ceiling half; ties are broken toward the lower index.
    """
    n = loads.size
    partner = np.full(n, -1, dtype=np.int64)
    case_one = np.zeros(n, dtype=bool)
    for (lo, hi), coin in zip(choices.edges, choices.lo_gets_ceil):
        partner[lo], partner[hi] = hi, lo
        flag = coin == (loads[lo] >= loads[hi])
        case_one[lo] = case_one[hi] = flag
    return partner, case_one


def _advance_family(place: np.ndarray, height: np.ndarray, loads: np.ndarray,
                    partner: np.ndarray, case_one: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized move_height over one token family.

    `loads` is the family's own pile sizes. Movers necessarily sit on the
    bigger pile of their edge, so staying means keeping the current vertex.
    """
    w = place
    matched = partner[w] >= 0
    low = np.where(matched, np.minimum(loads[w], loads[partner[w] % loads.size]), 0)
    moving = matched & (height > low)
    d = height - low
    stays = ((d & 1) == 1) == case_one[w]
    new_place = np.where(moving & ~stays, partner[w], w).astype(np.int32)
    new_height = np.where(moving, low + ((d + 1) >> 1), height)
    return new_place, new_height


def advance_ledger(ledger: TokenLedger, c: TokenConfig, m: "Matching | None",
                   choices: RoundingChoices) -> TokenLedger:
    """Advance both token families across one applied matching.

    `c` is the pre-update configuration and `choices` the coins actually
    used by the averaging step. Raises LedgerViolation when the ledger does
    not describe `c`.
    """
    loads = c.loads
    if ledger.n != c.n or ledger.total != c.total:
        raise LedgerViolation("ledger and configuration disagree on n or K")
    if m is not None and tuple(m) != choices.edges:
        raise LedgerViolation("rounding choices do not belong to this matching")
    if not np.array_equal(ledger.loads_from_tokens(), loads):
        raise LedgerViolation("token places do not reproduce the configuration")
    if not np.array_equal(ledger.complementary_counts(), c.total - loads):
        raise LedgerViolation("complementary places do not match K - loads")
    partner, case_one = _case_one_flags(loads, choices)
    place, height = _advance_family(
        ledger.place, ledger.height, loads, partner, case_one)
    cplace, cheight = _advance_family(
        ledger.cplace, ledger.cheight, c.total - loads, partner, case_one)
    return TokenLedger(ledger.n, ledger.total, place, height, cplace, cheight)


def verify_halved_bound(h, x, partner_load, h_next) -> bool:
    """Check h_next - x <= ceil((h - x) / 2) under h >= x >= partner_load.

    The threshold x may be any real that is exactly representable as a
    Fraction (the analysis only ever needs integers and half-integers).
    """
    xf = Fraction(x)
    if not (Fraction(h) >= xf and Fraction(partner_load) <= xf):
        raise ValueError("hypotheses require partner_load <= x <= h")
    return h_next - xf <= math.ceil(Fraction(h - x) / 2)


def _check_family(place: np.ndarray, height: np.ndarray, loads: np.ndarray,
                  what: str) -> None:
    if not np.array_equal(np.bincount(place, minlength=loads.size), loads):
        raise LedgerViolation(f"{what}: per-vertex token counts do not match loads")
    if height.size == 0:
        return
    if height.min() < 1 or (height > loads[place]).any():
        raise LedgerViolation(f"{what}: height outside 1..pile size")
    key = place.astype(np.int64) * (int(height.max()) + 1) + height
    key.sort()
    if key.size > 1 and (np.diff(key) == 0).any():
        raise LedgerViolation(f"{what}: duplicate (vertex, height) slot")


def check_ledger(ledger: TokenLedger, c: TokenConfig) -> None:
    """Raise LedgerViolation unless every slot invariant holds against c.

    Counts matching the loads, heights within 1..pile size and pairwise
    distinct slots force each pile to be exactly {1, ..., pile size}; the
    same argument applies to the complementary family, which in turn pins
    the non-inverted complementary heights into loads[v]+1 .. K.
    """
    if ledger.n != c.n or ledger.total != c.total:
        raise LedgerViolation("ledger and configuration disagree on n or K")
    _check_family(ledger.place, ledger.height, c.loads, "tokens")
    _check_family(ledger.cplace, ledger.cheight, c.total - c.loads,
                  "complementary tokens")
    ch = ledger.complementary_heights()
    if ch.size and ((ch < c.loads[ledger.cplace] + 1).any() or (ch > c.total).any()):
        raise LedgerViolation(
            "complementary duality: K+1 - inverted height left loads[v]+1 .. K")


def verify_step(before: TokenLedger, after: TokenLedger, c_before: TokenConfig,
                choices: RoundingChoices) -> None:
    """Check the per-step observations for one advance.

    Heights of both families never increase, and every moving token's drop
    is exactly the halved gap: new height - low = ceil((old height - low)/2)
    for tokens above the smaller pile of their matched edge.
    """
    if (after.height > before.height).any():
        raise LedgerViolation("a token height increased")
    if (after.cheight > before.cheight).any():
        raise LedgerViolation("a complementary token height increased")
    loads = c_before.loads
    partner, _ = _case_one_flags(loads, choices)
    for pl, h0, h1, fam_loads, what in (
            (before.place, before.height, after.height, loads, "tokens"),
            (before.cplace, before.cheight, after.cheight,
             c_before.total - loads, "complementary tokens")):
        matched = partner[pl] >= 0
        if not matched.any():
            if not np.array_equal(h0, h1):
                raise LedgerViolation(f"{what}: height changed without a matching")
            continue
        low = np.where(matched,
                       np.minimum(fam_loads[pl], fam_loads[partner[pl] % loads.size]), 0)
        moving = matched & (h0 > low)
        want = np.where(moving, low + ((h0 - low + 1) >> 1), h0)
        if not np.array_equal(h1, want):
            raise LedgerViolation(f"{what}: height update is not the halved gap")


def halved_bound_exhaustive(h_max: int = 50, x_max_twice: int = 50) -> int:
    """Enumerate the halved-gap bound over integer and half-integer x.

    For every x = j/2 with 0 <= j <= x_max_twice, every partner load at most
    x, every starting height in [x, h_max] and both rounding cases, apply
    the reallocation rule and check the bound. The complementary family
    follows the identical rule with its own pile sizes, so the enumeration
    covers both parts. Returns the number of cases checked.
    """
    checked = 0
    for j in range(0, x_max_twice + 1):
        x = Fraction(j, 2)
        for partner_load in range(0, math.floor(x) + 1):
            for h in range(math.ceil(x), h_max + 1):
                for case_one in (False, True):
                    _, h_next = move_height(h, partner_load, case_one)
                    if not verify_halved_bound(h, x, partner_load, h_next):
                        raise LedgerViolation(
                            f"halved bound fails at h={h}, x={x}, "
                            f"partner_load={partner_load}, case_one={case_one}")
                    checked += 1
    return checked


def dump_trace(path, step: int, ledger: TokenLedger, append: bool = True) -> None:
    """Append one CSV line per token: step, family, token id, place, height."""
    mode = "a" if append else "w"
    with open(path, mode, newline="") as fh:
        w = csv.writer(fh)
        if not append:
            w.writerow(["step", "family", "token", "place", "height"])
        for i in range(ledger.place.size):
            w.writerow([step, "token", i, int(ledger.place[i]), int(ledger.height[i])])
        for i in range(ledger.cplace.size):
            w.writerow([step, "complementary", i, int(ledger.cplace[i]),
                        int(ledger.cheight[i])])
