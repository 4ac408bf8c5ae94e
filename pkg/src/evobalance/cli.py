"""Command-line front end: simulate, sweep, fairness, mixing, verify."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .corpus import fairness_corpus
from .evolving_graph import (EdgeMarkovParams, evolve, mixing_steps, new_graph,
                             stationary_edge_probability)
from .harness import (ExperimentConfig, csv_rows, emit, json_doc,
                      run_experiment)
from .matchers import MatcherKind, estimate_all_edges, fairness_floor
from .theory import c_star, near_balanced_exhaustive, low_side_exhaustive
from .token_ledger import halved_bound_exhaustive

_MATCHER_TAGS = [k.value for k in MatcherKind]
_BOOL_FLAGS = {"ledger", "plot", "no-timing"}


def _config_tokens(path: Path) -> list[str]:
    """key=value lines -> CLI tokens (file values sit before real flags,
    so explicit flags override the file)."""
    tokens: list[str] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            key, sep, value = text.partition("=")
            if not sep:
                raise SystemExit(f"{path}:{lineno}: expected key=value, got {text!r}")
            flag = key.strip().replace("_", "-")
            value = value.strip()
            if flag in _BOOL_FLAGS:
                if value.lower() in ("1", "true", "yes", "on"):
                    tokens.append(f"--{flag}")
                elif value.lower() not in ("0", "false", "no", "off"):
                    raise SystemExit(f"{path}:{lineno}: boolean flag {flag} "
                                     f"got {value!r}")
            else:
                tokens.extend((f"--{flag}", value))
    return tokens


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _tag_list(text: str) -> list[str]:
    tags = [x.strip() for x in text.split(",") if x.strip()]
    for t in tags:
        MatcherKind.from_tag(t)
    return tags


def _pq_list(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.split(","):
        if not item.strip():
            continue
        p, sep, q = item.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(
                f"expected p:q, got {item!r}")
        out.append((float(p), float(q)))
    return out


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--ledger", action="store_true",
                   help="co-run the token bookkeeping and verify it per step")
    p.add_argument("--eps", type=float, default=0.25,
                   help="failure budget used when reporting the step bound")
    p.add_argument("--workers", type=int, default=1)


def _add_out_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--plot", action="store_true",
                   help="render a figure next to --out (same stem, .png)")
    p.add_argument("--no-timing", action="store_true",
                   help="leave wall-time fields empty for byte-stable output")
    p.add_argument("--config", type=Path, default=None,
                   help="key=value file supplying any flag; flags override it")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evobalance",
        description="Load balancing via random matchings on evolving graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one experiment")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--p", type=float, required=True)
    sim.add_argument("--q", type=float, required=True)
    sim.add_argument("--matcher", choices=_MATCHER_TAGS, default="simple")
    sim.add_argument("--init-graph", default="stationary",
                     help="empty | complete | stationary | file:PATH")
    sim.add_argument("--init-load", required=True,
                     help="point:K | two-level:lo,hi,count | uniform:K,seed "
                          "| file:PATH")
    _add_run_flags(sim)
    _add_out_flags(sim)
    sim.set_defaults(func=_cmd_simulate)

    sw = sub.add_parser("sweep", help="cross product of n, delta, matcher, p:q")
    sw.add_argument("--n", type=_int_list, default=[64])
    sw.add_argument("--delta", type=_int_list, required=True,
                    help="initial discrepancies, run as point masses")
    sw.add_argument("--matcher", type=_tag_list, default=["lr"])
    sw.add_argument("--pq", type=_pq_list, default=[(0.5, 0.5)],
                    help="comma-separated p:q pairs")
    sw.add_argument("--init-graph", default="stationary")
    _add_run_flags(sw)
    _add_out_flags(sw)
    sw.set_defaults(func=_cmd_sweep)

    fair = sub.add_parser("fairness",
                          help="estimate per-edge inclusion over the corpus")
    fair.add_argument("--matcher", type=_tag_list,
                      default=list(_MATCHER_TAGS))
    fair.add_argument("--samples", type=int, default=200_000)
    fair.add_argument("--seed", type=int, default=0)
    _add_out_flags(fair)
    fair.set_defaults(func=_cmd_fairness)

    mix = sub.add_parser("mixing",
                         help="empirical edge density against the stationary value")
    mix.add_argument("--n", type=int, default=256)
    mix.add_argument("--pq", type=_pq_list,
                     default=[(0.5, 0.5), (0.1, 0.1), (0.8, 0.1)])
    mix.add_argument("--tol", type=float, default=0.01,
                     help="total-variation tolerance for the step count")
    mix.add_argument("--seed", type=int, default=0)
    _add_out_flags(mix)
    mix.set_defaults(func=_cmd_mixing)

    ver = sub.add_parser("verify", help="run the exhaustive self-checks")
    ver.add_argument("--config", type=Path, default=None)
    ver.set_defaults(func=_cmd_verify)
    return parser


def _summary_lines(summary) -> list[str]:
    cfg = summary.config
    lines = [
        f"n={cfg.n} p={cfg.p} q={cfg.q} matcher={cfg.matcher.value} "
        f"init_graph={cfg.init_graph} init_load={cfg.init_load} "
        f"trials={len(summary.results)} seed={cfg.seed}"
    ]
    if summary.bound is None:
        lines.append("bound: undefined (initial discrepancy below 2); "
                     f"cap={summary.cap}")
    else:
        b = summary.bound
        lines.append(f"bound: t1={b.t1} t2={b.t2} total={b.total} "
                     f"(eps={cfg.eps}); cap={summary.cap}")
    med, mean = summary.median, summary.mean
    def _fmt(v):
        return "-" if v is None else f"{v:g}"

    lines.append(
        "t_bal: median={} mean={} q10={} q90={} max={} censored={}".format(
            _fmt(med), _fmt(mean), _fmt(summary.quantile(0.1)),
            _fmt(summary.quantile(0.9)), _fmt(summary.max),
            summary.censored_count))
    return lines


def _plot_path(out: Path, suffix: str = ".png") -> Path:
    return out.with_suffix(suffix)


def _cmd_simulate(args) -> int:
    cfg = ExperimentConfig(
        n=args.n, p=args.p, q=args.q, matcher=args.matcher,
        init_graph=args.init_graph, init_load=args.init_load,
        trials=args.trials, seed=args.seed, cap=args.cap,
        ledger=args.ledger, eps=args.eps)
    summary = run_experiment(cfg, workers=args.workers)
    for line in _summary_lines(summary):
        print(line)
    if args.out is not None:
        emit(summary, args.format, args.out, timing=not args.no_timing)
        print(f"wrote {args.out}")
        if args.plot:
            from .plots import tbal_histogram
            fig = tbal_histogram(
                summary.finite_times, _plot_path(args.out),
                bound=None if summary.bound is None else summary.bound.total,
                title=f"{cfg.matcher.value}, n={cfg.n}, p={cfg.p}, q={cfg.q}")
            print(f"wrote {fig}")
    elif args.plot:
        raise SystemExit("--plot needs --out to know where to put the figure")
    return 0


def _cmd_sweep(args) -> int:
    cells = [(n, d, tag, p, q)
             for n in args.n for d in args.delta
             for tag in args.matcher for p, q in args.pq]
    header = None
    all_rows: list[list] = []
    docs = []
    points = []
    for n, delta, tag, p, q in cells:
        cfg = ExperimentConfig(
            n=n, p=p, q=q, matcher=tag, init_graph=args.init_graph,
            init_load=f"point:{delta}", trials=args.trials, seed=args.seed,
            cap=args.cap, ledger=args.ledger, eps=args.eps)
        summary = run_experiment(cfg, workers=args.workers)
        header, rows = csv_rows(summary, timing=not args.no_timing)
        all_rows.extend(rows)
        docs.append(json_doc(summary, timing=not args.no_timing))
        points.append((delta, summary.median,
                       f"{tag} n={n} p={p} q={q}"))
        print(f"n={n} delta={delta} matcher={tag} p={p} q={q} "
              f"median={summary.median} censored={summary.censored_count}")
    if args.out is not None:
        if args.format == "csv":
            with open(args.out, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(all_rows)
        else:
            with open(args.out, "w") as fh:
                json.dump({"cells": docs}, fh, indent=2)
                fh.write("\n")
        print(f"wrote {args.out}")
        if args.plot:
            from .plots import sweep_medians
            usable = [(x, m, lab) for x, m, lab in points if m is not None]
            fig = sweep_medians(usable, _plot_path(args.out))
            print(f"wrote {fig}")
    elif args.plot:
        raise SystemExit("--plot needs --out to know where to put the figure")
    return 0


def _cmd_fairness(args) -> int:
    rows = []
    scatter = []
    worst = {}
    for gi, (name, g) in enumerate(fairness_corpus()):
        deg = g.degrees()
        for ki, tag in enumerate(args.matcher):
            rng = np.random.default_rng([args.seed, gi, ki])
            edges, est, se = estimate_all_edges(tag, g, args.samples, rng)
            floor_const = fairness_floor(tag, g.n)
            for (u, v), e, s in zip(edges, est, se):
                floor = floor_const / max(deg[u], deg[v])
                clears = bool(e - 3.0 * s >= floor)
                rows.append([name, tag, int(u), int(v), int(deg[u]),
                             int(deg[v]), repr(floor), repr(float(e)),
                             repr(float(s)), int(clears)])
                scatter.append((floor, float(e), float(s), tag))
                margin = (e - 3.0 * s) - floor
                if tag not in worst or margin < worst[tag][0]:
                    worst[tag] = (margin, name, (int(u), int(v)))
    failures = [r for r in rows if not r[-1]]
    for tag in args.matcher:
        m, name, edge = worst[tag]
        print(f"{tag}: worst margin {m:+.5f} at {name} edge {edge} "
              f"({args.samples} samples)")
    print(f"{len(rows)} edge estimates, {len(failures)} below floor")
    if args.out is not None:
        header = ["graph", "matcher", "u", "v", "deg_u", "deg_v",
                  "floor", "estimate", "stderr", "clears"]
        if args.format == "csv":
            with open(args.out, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)
        else:
            with open(args.out, "w") as fh:
                json.dump({"samples": args.samples,
                           "rows": [dict(zip(header, r)) for r in rows]},
                          fh, indent=2)
                fh.write("\n")
        print(f"wrote {args.out}")
        if args.plot:
            from .plots import fairness_scatter
            fig = fairness_scatter(scatter, _plot_path(args.out))
            print(f"wrote {fig}")
    elif args.plot:
        raise SystemExit("--plot needs --out to know where to put the figure")
    return 0 if not failures else 1


def _cmd_mixing(args) -> int:
    n = args.n
    pairs = n * (n - 1) // 2
    rows = []
    series = []
    ok_all = True
    for pi, (p, q) in enumerate(args.pq):
        params = EdgeMarkovParams(p, q)
        steps = mixing_steps(params, args.tol)
        target = stationary_edge_probability(params)
        sigma = math.sqrt(target * (1.0 - target) / pairs)
        for si, start in enumerate(("empty", "complete")):
            rng = np.random.default_rng([args.seed, pi, si])
            g = new_graph(n, start, params=params, rng=rng)
            density = [g.edge_count / pairs]
            for _ in range(steps):
                g = evolve(g, params, rng)
                density.append(g.edge_count / pairs)
            err = abs(density[-1] - target)
            ok = err <= args.tol + 3.0 * sigma
            ok_all = ok_all and ok
            rows.append([repr(p), repr(q), start, steps, repr(density[-1]),
                         repr(target), repr(err), repr(sigma), int(ok)])
            series.append((f"p={p} q={q} from {start}", np.array(density)))
            print(f"p={p} q={q} start={start}: density {density[-1]:.4f} "
                  f"vs {target:.4f} after {steps} steps "
                  f"({'ok' if ok else 'OUTSIDE TOLERANCE'})")
    if args.out is not None:
        header = ["p", "q", "start", "steps", "density", "target",
                  "abs_err", "sigma", "ok"]
        if args.format == "csv":
            with open(args.out, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)
        else:
            with open(args.out, "w") as fh:
                json.dump({"n": n, "tol": args.tol,
                           "rows": [dict(zip(header, r)) for r in rows]},
                          fh, indent=2)
                fh.write("\n")
        print(f"wrote {args.out}")
        if args.plot:
            from .plots import mixing_curves
            fig = mixing_curves(series, _plot_path(args.out))
            print(f"wrote {fig}")
    elif args.plot:
        raise SystemExit("--plot needs --out to know where to put the figure")
    return 0 if ok_all else 1


def _cmd_verify(args) -> int:
    checks = [
        ("halved-gap bound (heights to 50, half-integer thresholds)",
         halved_bound_exhaustive),
        ("low-side count >= n/3 (n <= 6, K <= 18)", low_side_exhaustive),
        ("near-balanced band membership (n <= 6, K <= 24)", near_balanced_exhaustive),
    ]
    failed = 0
    for label, fn in checks:
        try:
            count = fn()
        except Exception as exc:
            print(f"FAIL {label}: {exc}")
            failed += 1
        else:
            print(f"PASS {label}: {count} cases")
    c1 = c_star(1.0)
    if abs(c1 - 0.02678) <= 1e-4:
        print(f"PASS c_star(1) = {c1:.6f}")
    else:
        print(f"FAIL c_star(1) = {c1:.6f}, expected 0.02678 +- 1e-4")
        failed += 1
    return 0 if failed == 0 else 1


def main(argv: "list[str] | None" = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path, default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is not None:
        # file tokens go right after the subcommand so real flags override
        argv = argv[:1] + _config_tokens(known.config) + argv[1:]
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
