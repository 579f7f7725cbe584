"""influmax: two-phase influence maximization with RR-set sampling."""

__version__ = "0.1.0"

from .baseline import GreedyConfig, greedy_select, required_r
from .coverage import RRCollection, fraction_covered, greedy_max_coverage
from .evaluator import (ExactOracleResult, SpreadEstimate, exact_spread,
                        exhaustive_opt, simulate_spread)
from .graph import Graph, load_edge_list
from .models import (IC, LT, WC, ModelKind, ModelSpec,
                     assign_lt_uniform, assign_weighted_cascade,
                     sample_trigger_set)
from .sampler import RRBatch, RRSet, generate_rr_batch, generate_rr_set, kappa
from .tim import (SeedResult, TimParams, compute_lambda, kpt_estimation,
                  node_selection, refine_kpt, run_tim)

__all__ = [
    "Graph", "load_edge_list",
    "ModelKind", "ModelSpec", "IC", "WC", "LT",
    "assign_weighted_cascade", "assign_lt_uniform", "sample_trigger_set",
    "RRSet", "RRBatch", "generate_rr_set", "generate_rr_batch", "kappa",
    "RRCollection", "fraction_covered", "greedy_max_coverage",
    "TimParams", "SeedResult", "compute_lambda", "kpt_estimation",
    "refine_kpt", "node_selection", "run_tim",
    "SpreadEstimate", "ExactOracleResult", "simulate_spread",
    "exact_spread", "exhaustive_opt",
    "GreedyConfig", "greedy_select", "required_r",
]
