"""Randomized load balancing via random matchings on evolving graphs.

The graph is a birth/death process per vertex pair; each step a randomized
matcher proposes a matching of the current graph and every matched pair
splits its combined load into ceiling and floor halves with a fair coin.
The package provides the graph process, four matching samplers with
per-edge fairness floors, exact balance accounting, token-level
instrumentation of the dynamics, closed-form step bounds, and a seeded
experiment harness with csv/json output.
"""

from .balance import (RoundingChoices, TokenConfig, apply_matching,
                      balance_band, discrepancy, initial_config, is_balanced,
                      nearest_int, read_loads)
from .corpus import connected_graphs_upto, fairness_corpus
from .evolving_graph import (EdgeMarkovParams, Graph, degree, evolve,
                             mixing_steps, new_graph, read_edge_list,
                             stationary_edge_probability)
from .harness import (ExperimentConfig, ExperimentSummary, InvariantViolation,
                      TrialResult, emit, resolve_cap, run_experiment,
                      run_trial)
from .matchers import (MatcherContext, MatcherKind, Matching, check_matching,
                       draw_matching, ds_matching, estimate_all_edges,
                       estimate_edge_inclusion, fairness_floor, lr_matching,
                       matching_from_partners, sample_partners,
                       simple_matching, uniform_edge_matching)
from .theory import (BoundInputs, TheoremBound, c_star, near_balanced_exhaustive,
                     low_side_count_ok, near_balanced, low_side_exhaustive,
                     r_factor, theorem_bound)
from .token_ledger import (LedgerViolation, TokenLedger, advance_ledger,
                           check_ledger, dump_trace, init_ledger,
                           halved_bound_exhaustive, move_height,
                           verify_halved_bound, verify_step)

__version__ = "0.1.0"

__all__ = [
    "Graph", "EdgeMarkovParams", "new_graph", "evolve", "degree",
    "stationary_edge_probability", "mixing_steps", "read_edge_list",
    "MatcherKind", "Matching", "MatcherContext", "matching_from_partners",
    "check_matching", "sample_partners", "draw_matching", "simple_matching",
    "uniform_edge_matching", "lr_matching", "ds_matching", "fairness_floor",
    "estimate_edge_inclusion", "estimate_all_edges",
    "TokenConfig", "RoundingChoices", "initial_config", "read_loads",
    "nearest_int", "discrepancy", "apply_matching", "is_balanced",
    "balance_band",
    "TokenLedger", "LedgerViolation", "init_ledger", "advance_ledger",
    "move_height", "verify_halved_bound", "check_ledger", "verify_step",
    "halved_bound_exhaustive", "dump_trace",
    "BoundInputs", "TheoremBound", "r_factor", "c_star", "theorem_bound",
    "low_side_count_ok", "near_balanced", "low_side_exhaustive",
    "near_balanced_exhaustive",
    "ExperimentConfig", "TrialResult", "ExperimentSummary",
    "InvariantViolation", "run_trial", "run_experiment", "resolve_cap",
    "emit",
    "connected_graphs_upto", "fairness_corpus",
    "__version__",
]
