"""Token ledger instrumentation: stacking, reallocation, and invariants."""

import csv
from fractions import Fraction

import numpy as np
import pytest

from evobalance import (EdgeMarkovParams, LedgerViolation, Matching,
                        RoundingChoices, TokenConfig, TokenLedger,
                        advance_ledger, apply_matching, check_ledger,
                        draw_matching, dump_trace, evolve, init_ledger,
                        halved_bound_exhaustive, move_height, new_graph,
                        verify_halved_bound, verify_step)

from oracles import token_move_ref


def _cfg(*loads):
    return TokenConfig(np.array(loads, dtype=np.int64))


def test_init_ledger_stacks_both_families():
    c = _cfg(2, 0)
    led = init_ledger(c)
    assert list(led.place) == [0, 0] and list(led.height) == [1, 2]
    # complementary counts are K - loads, heights again 1..pile size
    assert list(led.cplace) == [1, 1] and list(led.cheight) == [1, 2]
    check_ledger(led, c)

    c = _cfg(6, 1, 1)
    led = init_ledger(c)
    assert led.total == 8 and led.place.size == 8
    assert led.cplace.size == 8 * (3 - 1)
    assert np.array_equal(led.loads_from_tokens(), c.loads)
    assert np.array_equal(led.complementary_counts(), 8 - c.loads)
    check_ledger(led, c)
    # non-inverted complementary heights live in loads[v]+1 .. K
    ch = led.complementary_heights()
    assert (ch >= c.loads[led.cplace] + 1).all() and (ch <= 8).all()


def test_init_ledger_empty_configuration():
    c = _cfg(0, 0, 0)
    led = init_ledger(c)
    assert led.place.size == 0 and led.cplace.size == 0
    check_ledger(led, c)


def test_move_height_matches_reference():
    for low in range(0, 21):
        for h in range(low + 1, low + 41):
            for case_one in (False, True):
                assert move_height(h, low, case_one) == \
                    token_move_ref(h, low, case_one)


def test_move_height_at_or_below_low_is_identity():
    assert move_height(3, 3, True) == (True, 3)
    assert move_height(2, 5, False) == (True, 2)


def _advance_forced(loads, lo_gets_ceil):
    """Advance the (6,1,1) example across edge (0,1) with a forced coin."""
    c = _cfg(*loads)
    led = init_ledger(c)
    ch = RoundingChoices(((0, 1),), (lo_gets_ceil,))
    nxt = advance_ledger(led, c, Matching(((0, 1),)), ch)
    return led, nxt


def test_advance_bigger_keeps_ceiling_case():
    # loads (6,1): coin True gives vertex 0 the ceiling, so the bigger pile
    # keeps ceil(7/2)=4 tokens. The height-5 token has gap 4 (even) and hops
    # to the partner at height 1 + 2 = 3; the height-6 token (gap 5, odd)
    # stays and lands at height 4.
    led, nxt = _advance_forced((6, 1, 1), True)
    i5 = int(np.flatnonzero((led.place == 0) & (led.height == 5))[0])
    i6 = int(np.flatnonzero((led.place == 0) & (led.height == 6))[0])
    assert (nxt.place[i5], nxt.height[i5]) == (1, 3)
    assert (nxt.place[i6], nxt.height[i6]) == (0, 4)
    after = _cfg(4, 3, 1)
    assert np.array_equal(nxt.loads_from_tokens(), after.loads)
    check_ledger(nxt, after)
    # complementary piles (2,7) split to (4,5); the inverted-height-3 token
    # on the big pile has gap 1 (odd) and stays, dropping to height 3
    j3 = int(np.flatnonzero((led.cplace == 1) & (led.cheight == 3))[0])
    assert (nxt.cplace[j3], nxt.cheight[j3]) == (1, 3)
    verify_step(led, nxt, _cfg(6, 1, 1), RoundingChoices(((0, 1),), (True,)))


def test_advance_bigger_takes_floor_case():
    # coin False: vertex 0 drops to floor(7/2)=3, so odd gaps now hop.
    led, nxt = _advance_forced((6, 1, 1), False)
    i5 = int(np.flatnonzero((led.place == 0) & (led.height == 5))[0])
    i6 = int(np.flatnonzero((led.place == 0) & (led.height == 6))[0])
    assert (nxt.place[i5], nxt.height[i5]) == (0, 3)
    assert (nxt.place[i6], nxt.height[i6]) == (1, 4)
    after = _cfg(3, 4, 1)
    assert np.array_equal(nxt.loads_from_tokens(), after.loads)
    check_ledger(nxt, after)
    j3 = int(np.flatnonzero((led.cplace == 1) & (led.cheight == 3))[0])
    assert (nxt.cplace[j3], nxt.cheight[j3]) == (0, 3)
    verify_step(led, nxt, _cfg(6, 1, 1), RoundingChoices(((0, 1),), (False,)))


def test_advance_leaves_unmatched_vertices_alone():
    led, nxt = _advance_forced((6, 1, 1), True)
    keep = led.place == 2
    assert np.array_equal(nxt.place[keep], led.place[keep])
    assert np.array_equal(nxt.height[keep], led.height[keep])
    ckeep = led.cplace == 2
    assert np.array_equal(nxt.cplace[ckeep], led.cplace[ckeep])
    assert np.array_equal(nxt.cheight[ckeep], led.cheight[ckeep])


def test_advance_equal_piles_is_identity():
    c = _cfg(4, 4)
    led = init_ledger(c)
    for coin in (False, True):
        nxt = advance_ledger(led, c, None, RoundingChoices(((0, 1),), (coin,)))
        assert np.array_equal(nxt.place, led.place)
        assert np.array_equal(nxt.height, led.height)
        check_ledger(nxt, c)


def test_advance_consistency_errors():
    c = _cfg(3, 1)
    led = init_ledger(c)
    with pytest.raises(LedgerViolation):
        advance_ledger(led, _cfg(3, 2), None, RoundingChoices((), ()))
    with pytest.raises(LedgerViolation):
        advance_ledger(led, c, Matching(((0, 1),)),
                       RoundingChoices((), ()))
    bad = TokenLedger(led.n, led.total, led.place.copy() * 0, led.height,
                      led.cplace, led.cheight)
    with pytest.raises(LedgerViolation):
        advance_ledger(bad, c, None, RoundingChoices(((0, 1),), (True,)))


def test_check_ledger_rejects_corrupt_states():
    c = _cfg(2, 1)
    led = init_ledger(c)
    dup_height = led.height.copy()
    dup_height[1] = dup_height[0]
    with pytest.raises(LedgerViolation):
        check_ledger(TokenLedger(led.n, led.total, led.place, dup_height,
                                 led.cplace, led.cheight), c)
    high = led.height.copy()
    high[0] = 99
    with pytest.raises(LedgerViolation):
        check_ledger(TokenLedger(led.n, led.total, led.place, high,
                                 led.cplace, led.cheight), c)
    with pytest.raises(LedgerViolation):
        check_ledger(led, _cfg(1, 2))


def test_verify_halved_bound_reference_cases():
    assert verify_halved_bound(7, 3, 1, 5)
    assert not verify_halved_bound(7, 3, 1, 6)
    assert verify_halved_bound(7, Fraction(5, 2), 2, 5)
    assert not verify_halved_bound(7, Fraction(5, 2), 2, 6)
    assert verify_halved_bound(4, 4, 0, 4)
    with pytest.raises(ValueError):
        verify_halved_bound(7, 3, 4, 5)  # partner above threshold
    with pytest.raises(ValueError):
        verify_halved_bound(2, 3, 1, 2)  # height below threshold


def test_exhaustive_enumeration_passes():
    # sum over x = j/2 of 2 * (floor(x)+1) * (h_max - ceil(x) + 1) cases
    assert halved_bound_exhaustive(12, 12) == 868
    assert halved_bound_exhaustive() == 46202


def test_instrumented_random_runs_keep_all_invariants():
    params = EdgeMarkovParams(0.5, 0.5)
    for seed in (1, 2, 3):
        rng = np.random.default_rng(seed)
        g = new_graph(6, "stationary", params=params, rng=rng)
        c = TokenConfig(rng.integers(0, 12, size=6))
        led = init_ledger(c)
        check_ledger(led, c)
        for _ in range(150):
            m = draw_matching("simple", g, rng)
            nxt_c, choices = apply_matching(c, m, rng)
            nxt_led = advance_ledger(led, c, m, choices)
            verify_step(led, nxt_led, c, choices)
            check_ledger(nxt_led, nxt_c)
            assert (nxt_led.height <= led.height).all()
            assert (nxt_led.cheight <= led.cheight).all()
            c, led = nxt_c, nxt_led
            g = evolve(g, params, rng)


def test_heights_never_increase_from_point_mass():
    # from a point mass the top token's height is weakly decreasing and
    # every matched move is the exact halved gap; verify_step checks both
    rng = np.random.default_rng(9)
    c = _cfg(32, 0, 0, 0)
    led = init_ledger(c)
    g = new_graph(4, "complete")
    tops = [int(led.height.max())]
    for _ in range(30):
        m = draw_matching("uniform-edge", g, rng)
        c2, choices = apply_matching(c, m, rng)
        led2 = advance_ledger(led, c, m, choices)
        verify_step(led, led2, c, choices)
        tops.append(int(led2.height.max()))
        c, led = c2, led2
    assert tops == sorted(tops, reverse=True)
    assert tops[-1] <= 10  # loads settle near 8 on 4 vertices


def test_dump_trace_round_trip(tmp_path):
    c = _cfg(6, 1, 1)
    led = init_ledger(c)
    path = tmp_path / "trace.csv"
    dump_trace(path, 0, led, append=False)
    dump_trace(path, 1, led)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "family", "token", "place", "height"]
    body = rows[1:]
    per_step = 8 + 8 * 2
    assert len(body) == 2 * per_step
    assert {r[0] for r in body} == {"0", "1"}
    assert {r[1] for r in body} == {"token", "complementary"}
    toks = [r for r in body if r[0] == "0" and r[1] == "token"]
    got = {(int(r[3]), int(r[4])) for r in toks}
    assert got == {(0, h) for h in range(1, 7)} | {(1, 1), (2, 1)}
