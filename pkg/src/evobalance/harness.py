"""Experiment orchestration: seeded trials, aggregation, and file output.

A trial runs the loop: check balance, draw a matching from the current
graph, average the matched pairs, then let the graph take one birth/death
step. The recorded balancing time is the first step index at which every
load sits in the three-value band around the mean. Trials are independent
jobs with rng streams derived from (master seed, trial index), so results
do not depend on worker count.
"""

from __future__ import annotations

import csv
import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat
from pathlib import Path

import numpy as np

from .balance import (TokenConfig, apply_matching, discrepancy, initial_config,
                      is_balanced)
from .evolving_graph import EdgeMarkovParams, evolve, new_graph
from .matchers import (MatcherContext, MatcherKind, fairness_floor,
                       matching_from_partners, sample_partners)
from .theory import BoundInputs, TheoremBound, theorem_bound
from .token_ledger import advance_ledger, check_ledger, init_ledger, verify_step

__all__ = [
    "InvariantViolation",
    "ExperimentConfig",
    "TrialResult",
    "ExperimentSummary",
    "run_trial",
    "run_experiment",
    "resolve_cap",
    "csv_rows",
    "json_doc",
    "emit",
]

FALLBACK_CAP = 10 ** 6


class InvariantViolation(RuntimeError):
    """A per-step runtime assertion failed (step index in the message)."""


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    p: float
    q: float
    matcher: MatcherKind = MatcherKind.SIMPLE
    init_graph: str = "stationary"
    init_load: "str | tuple[int, ...]" = "point:0"
    trials: int = 1
    seed: int = 0
    cap: int | None = None
    ledger: bool = False
    eps: float = 0.25

    def __post_init__(self) -> None:
        EdgeMarkovParams(self.p, self.q)  # validates p, q
        object.__setattr__(self, "matcher", MatcherKind.from_tag(self.matcher))
        if not isinstance(self.init_load, str):
            object.__setattr__(self, "init_load", tuple(self.init_load))
        if self.trials < 1:
            raise ValueError(f"trial count must be at least 1, got {self.trials}")
        if self.cap is not None and self.cap < 1:
            raise ValueError(f"step cap must be at least 1, got {self.cap}")


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    t_bal: int | None
    censored: bool
    delta0: int
    final_min: int
    final_max: int
    mean: float
    violations: int
    wall_ms: float

    def matches(self, other: "TrialResult") -> bool:
        """Equality on everything except wall time."""
        a = (self.trial, self.seed, self.t_bal, self.censored, self.delta0,
             self.final_min, self.final_max, self.mean, self.violations)
        b = (other.trial, other.seed, other.t_bal, other.censored, other.delta0,
             other.final_min, other.final_max, other.mean, other.violations)
        return a == b


@dataclass(frozen=True)
class ExperimentSummary:
    config: ExperimentConfig
    cap: int
    bound: TheoremBound | None
    results: tuple[TrialResult, ...]

    @property
    def finite_times(self) -> list[int]:
        return [r.t_bal for r in self.results if r.t_bal is not None]

    @property
    def censored_count(self) -> int:
        return sum(1 for r in self.results if r.censored)

    @property
    def median(self) -> float | None:
        ts = self.finite_times
        return float(statistics.median(ts)) if ts else None

    @property
    def mean(self) -> float | None:
        ts = self.finite_times
        return float(statistics.fmean(ts)) if ts else None

    def quantile(self, q: float) -> float | None:
        ts = self.finite_times
        return float(np.quantile(ts, q)) if ts else None

    @property
    def max(self) -> int | None:
        ts = self.finite_times
        return max(ts) if ts else None


def _bound_for(cfg: ExperimentConfig, delta0: int) -> TheoremBound | None:
    if delta0 < 2:
        return None
    return theorem_bound(BoundInputs(
        n=cfg.n, delta=delta0, p=cfg.p, q=cfg.q,
        fairness=fairness_floor(cfg.matcher, cfg.n), eps=cfg.eps))


def resolve_cap(cfg: ExperimentConfig) -> int:
    """The configured cap, or ten times the step bound (10^6 when the
    bound is undefined because the initial discrepancy is below 2)."""
    if cfg.cap is not None:
        return cfg.cap
    bound = _bound_for(cfg, discrepancy(initial_config(cfg.init_load, cfg.n)))
    return 10 * bound.total if bound is not None else FALLBACK_CAP


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialResult:
    """Run one seeded trial to balance or to the step cap.

    Per-step invariants (conservation, monotone extremes, and with the
    ledger flag the full token bookkeeping) are asserted every step; any
    violation raises InvariantViolation with the step index.
    """
    start = time.perf_counter()
    params = EdgeMarkovParams(cfg.p, cfg.q)
    rng = np.random.default_rng([cfg.seed, trial_index])
    g = new_graph(cfg.n, cfg.init_graph, params=params, rng=rng)
    c = initial_config(cfg.init_load, cfg.n)
    delta0 = discrepancy(c)
    total = c.total
    cap = resolve_cap(cfg)
    ledger = init_ledger(c) if cfg.ledger else None
    # with p=1, q=0 the graph is complete from the first transition on and
    # the evolve call would consume randomness to no effect, so freeze it
    static = cfg.p == 1.0 and cfg.q == 0.0
    frozen = static and g.is_complete()
    ctx: MatcherContext | None = None
    cur_min = int(c.loads.min())
    cur_max = int(c.loads.max())
    t = 0
    censored = False
    while not is_balanced(c):
        if t >= cap:
            censored = True
            break
        if ctx is None:
            ctx = MatcherContext(g)
        row = sample_partners(cfg.matcher, ctx, rng, 1)[0]
        vs = np.flatnonzero(row >= 0)
        vs = vs[row[vs] > vs]
        edges = np.column_stack((vs, row[vs])).astype(np.int64)
        c_next, choices = apply_matching(c, edges, rng)
        if c_next.total != total:
            raise InvariantViolation(f"step {t}: token total changed "
                                     f"{total} -> {c_next.total}")
        nmin = int(c_next.loads.min())
        nmax = int(c_next.loads.max())
        if nmin < cur_min or nmax > cur_max:
            raise InvariantViolation(
                f"step {t}: extremes moved outward "
                f"({cur_min},{cur_max}) -> ({nmin},{nmax})")
        cur_min, cur_max = nmin, nmax
        if ledger is not None:
            m = matching_from_partners(row)
            ledger_next = advance_ledger(ledger, c, m, choices)
            try:
                verify_step(ledger, ledger_next, c, choices)
                check_ledger(ledger_next, c_next)
            except Exception as exc:
                raise InvariantViolation(f"step {t}: {exc}") from exc
            ledger = ledger_next
        c = c_next
        if not frozen:
            g = evolve(g, params, rng)
            ctx = None
            if static and g.is_complete():
                frozen = True
        t += 1
    wall_ms = (time.perf_counter() - start) * 1e3
    return TrialResult(
        trial=trial_index, seed=cfg.seed,
        t_bal=None if censored else t, censored=censored, delta0=delta0,
        final_min=cur_min, final_max=cur_max, mean=total / cfg.n,
        violations=0, wall_ms=wall_ms)


def _trial_job(args: tuple[ExperimentConfig, int]) -> TrialResult:
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, trials: int | None = None,
                   workers: int = 1) -> ExperimentSummary:
    """Run the configured trials and aggregate balancing times.

    Results are ordered by trial index and are identical for any worker
    count; workers > 1 fans trials out over a process pool.
    """
    count = cfg.trials if trials is None else trials
    if count < 1:
        raise ValueError(f"trial count must be at least 1, got {count}")
    if workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(_trial_job,
                                     zip(repeat(cfg), range(count)),
                                     chunksize=max(1, count // (4 * workers))))
    else:
        results = tuple(run_trial(cfg, i) for i in range(count))
    delta0 = results[0].delta0
    return ExperimentSummary(config=cfg, cap=resolve_cap(cfg),
                             bound=_bound_for(cfg, delta0), results=results)


def _config_dict(cfg: ExperimentConfig) -> dict:
    return {
        "n": cfg.n, "p": cfg.p, "q": cfg.q, "matcher": cfg.matcher.value,
        "init_graph": cfg.init_graph,
        "init_load": (cfg.init_load if isinstance(cfg.init_load, str)
                      else list(cfg.init_load)),
        "trials": cfg.trials, "seed": cfg.seed, "cap": cfg.cap,
        "ledger": cfg.ledger, "eps": cfg.eps,
    }


_CSV_COLUMNS = ["trial", "seed", "n", "p", "q", "matcher", "delta0",
                "t_bal", "censored", "wall_ms"]


def _result_row(cfg: ExperimentConfig, r: TrialResult, timing: bool) -> list:
    return [r.trial, r.seed, cfg.n, repr(cfg.p), repr(cfg.q),
            cfg.matcher.value, r.delta0,
            "" if r.t_bal is None else r.t_bal, int(r.censored),
            repr(r.wall_ms) if timing else ""]


def csv_rows(summary: ExperimentSummary, timing: bool = True
             ) -> tuple[list[str], list[list]]:
    """Header and per-trial rows of the delimited output schema."""
    cfg = summary.config
    return list(_CSV_COLUMNS), [_result_row(cfg, r, timing)
                                for r in summary.results]


def json_doc(summary: ExperimentSummary, timing: bool = True) -> dict:
    """The json output document: config, bound, aggregates, per-trial rows."""
    cfg = summary.config
    return {
        "config": _config_dict(cfg),
        "cap": summary.cap,
        "bound": None if summary.bound is None else {
            "t1": summary.bound.t1, "t2": summary.bound.t2,
            "total": summary.bound.total,
        },
        "aggregates": {
            "median": summary.median, "mean": summary.mean,
            "q10": summary.quantile(0.1), "q90": summary.quantile(0.9),
            "max": summary.max, "censored": summary.censored_count,
        },
        "results": [
            {"trial": r.trial, "seed": r.seed, "n": cfg.n,
             "p": cfg.p, "q": cfg.q, "matcher": cfg.matcher.value,
             "delta0": r.delta0, "t_bal": r.t_bal,
             "censored": r.censored, "final_min": r.final_min,
             "final_max": r.final_max, "mean": r.mean,
             "violations": r.violations,
             "wall_ms": r.wall_ms if timing else None}
            for r in summary.results
        ],
    }


def emit(summary: ExperimentSummary, fmt: str, path, timing: bool = True) -> Path:
    """Write the per-trial table as csv or json; returns the path written.

    With timing=False the wall-time field is left empty so that repeated
    runs of one configuration produce byte-identical files.
    """
    out = Path(path)
    if fmt == "csv":
        header, rows = csv_rows(summary, timing)
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        return out
    if fmt == "json":
        with open(out, "w") as fh:
            json.dump(json_doc(summary, timing), fh, indent=2)
            fh.write("\n")
        return out
    raise ValueError(f"unknown output format {fmt!r}; expected csv or json")
