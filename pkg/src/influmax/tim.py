"""The two-phase TIM / TIM+ pipeline.

Phase 1 estimates a lower bound on the optimal spread (KPT*, optionally
refined to KPT+), phase 2 generates theta = ceil(lambda / bound) fresh RR
sets and runs greedy maximum coverage over them. All RR sets of the
selection phase are independent of the estimation phases; only the
refinement step reuses the estimation phase's final-iteration sets.

All logarithms are natural. Fractional counts are rounded up, which
preserves every lower-bound inequality.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .coverage import RRCollection, fraction_covered, greedy_max_coverage
from .graph import Graph
from .models import ModelSpec
from .sampler import RRBatch, empty_batch, generate_rr_batch, kappa_values

VARIANT_TIM = "tim"
VARIANT_TIM_PLUS = "tim+"


class TimError(Exception):
    pass


@dataclass(frozen=True)
class TimParams:
    k: int
    epsilon: float
    ell: float = 1.0
    variant: str = VARIANT_TIM_PLUS
    epsilon_prime: float | None = None
    master_seed: int = 0

    def validate(self, node_count: int) -> None:
        if self.k < 1 or self.k > node_count:
            raise TimError(f"k={self.k} must be in [1, n={node_count}]")
        if not 0.0 < self.epsilon <= 1.0:
            raise TimError("epsilon must be in (0, 1]")
        if self.ell < 0.5:
            raise TimError("ell must be >= 0.5")
        if self.variant not in (VARIANT_TIM, VARIANT_TIM_PLUS):
            raise TimError(f"unknown variant {self.variant!r}")
        if self.epsilon_prime is not None and self.epsilon_prime <= 0:
            raise TimError("epsilon_prime must be positive")


@dataclass
class EstimationTrace:
    kpt_star: float
    kpt_plus: float | None
    lambda_: float
    lambda_prime: float | None
    theta: int
    iteration_reached: int
    iteration_sums: list[float] = field(default_factory=list)
    iteration_counts: list[int] = field(default_factory=list)
    epsilon_prime: float | None = None
    ell_effective: float | None = None


@dataclass
class SeedResult:
    seeds: list
    seed_indices: list[int]
    covered_fraction: float
    estimated_spread: float
    trace: EstimationTrace | None = None
    timings: dict = field(default_factory=dict)
    rr_sets_generated: int = 0


@dataclass
class KptEstimate:
    kpt_star: float
    last_sets: RRBatch
    iteration_reached: int
    iteration_sums: list[float]
    iteration_counts: list[int]
    rr_sets_generated: int


@dataclass
class RefineResult:
    kpt_plus: float
    lambda_prime: float
    theta_prime: int


def log_binomial(n: int, k: int) -> float:
    """log C(n, k) via log-gamma, safe from overflow."""
    if k < 0 or k > n:
        raise TimError(f"C({n}, {k}) undefined")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def compute_lambda(n: int, k: int, epsilon: float, ell: float) -> float:
    """Sample-size coefficient: theta must be at least lambda / OPT."""
    if n < 2:
        raise TimError("n must be >= 2")
    if k > n:
        raise TimError("k must be <= n")
    bracket = ell * math.log(n) + log_binomial(n, k) + math.log(2.0)
    return (8.0 + 2.0 * epsilon) * n * bracket / (epsilon * epsilon)


def default_epsilon_prime(k: int, ell: float, epsilon: float) -> float:
    """Refinement accuracy heuristic, clamped so TIM+ keeps TIM's
    asymptotic complexity."""
    eps_prime = 5.0 * (ell * epsilon * epsilon / (k + ell)) ** (1.0 / 3.0)
    return max(eps_prime, epsilon / math.sqrt(k))


def kpt_estimation(graph: Graph, model: ModelSpec, k: int, ell: float,
                   rng: np.random.Generator) -> KptEstimate:
    """Adaptive estimation of KPT: doubling rounds of RR sets until the
    average kappa clears the 2^-i threshold.

    Runs floor(log2 n) - 1 rounds at most; if none triggers (including the
    degenerate n <= 3 case where the loop body never runs), falls back to
    KPT* = 1, the smallest possible value since a seed always activates
    itself.
    """
    n = graph.node_count
    if n < 2:
        raise TimError("kpt_estimation requires n >= 2")
    m = graph.edge_count
    max_iter = n.bit_length() - 2  # floor(log2 n) - 1
    base = 6.0 * ell * math.log(n) + 6.0 * math.log(math.log2(n))
    sums: list[float] = []
    counts: list[int] = []
    last = empty_batch()
    generated = 0
    for i in range(1, max_iter + 1):
        c_i = max(1, math.ceil(base * (2.0 ** i)))
        batch = generate_rr_batch(graph, model, c_i, rng)
        generated += c_i
        total = float(kappa_values(batch.widths, m, k).sum())
        sums.append(total)
        counts.append(c_i)
        last = batch
        if total / c_i > 2.0 ** (-i):
            kpt_star = max(1.0, n * total / (2.0 * c_i))
            return KptEstimate(kpt_star, batch, i, sums, counts, generated)
    return KptEstimate(1.0, last, max_iter if max_iter > 0 else 0,
                       sums, counts, generated)


def refine_kpt(graph: Graph, model: ModelSpec, k: int, ell: float,
               kpt_star: float, last_iteration_sets: RRBatch,
               epsilon_prime: float, rng: np.random.Generator) -> RefineResult:
    """Tighten KPT* using greedy coverage over the estimation phase's final
    RR sets, validated against theta' fresh sets. Returns at least KPT*."""
    if kpt_star < 1.0:
        raise TimError("kpt_star must be >= 1")
    if epsilon_prime <= 0:
        raise TimError("epsilon_prime must be positive")
    n = graph.node_count
    lambda_prime = ((2.0 + epsilon_prime) * ell * n * math.log(n)
                    / (epsilon_prime * epsilon_prime))
    if last_iteration_sets.num_sets == 0:
        return RefineResult(kpt_star, lambda_prime, 0)
    collection = RRCollection.from_batch(last_iteration_sets, n)
    seed_guess, _ = greedy_max_coverage(collection, k)
    theta_prime = max(1, math.ceil(lambda_prime / kpt_star))
    fresh = generate_rr_batch(graph, model, theta_prime, rng)
    f = fraction_covered(RRCollection.from_batch(fresh, n), seed_guess)
    kpt_prime = f * n / (1.0 + epsilon_prime)
    return RefineResult(max(kpt_prime, kpt_star), lambda_prime, theta_prime)


def select_from_collection(graph: Graph, collection: RRCollection,
                           k: int) -> SeedResult:
    """Greedy max coverage over an existing collection (also the test hook
    for injecting hand-built collections)."""
    seed_indices, covered = greedy_max_coverage(collection, k)
    frac = covered / collection.num_sets
    n = graph.node_count
    return SeedResult(
        seeds=[graph.node_ids[i] for i in seed_indices],
        seed_indices=seed_indices,
        covered_fraction=frac,
        estimated_spread=n * frac,
        rr_sets_generated=collection.num_sets,
    )


def node_selection(graph: Graph, model: ModelSpec, k: int, theta: int,
                   rng: np.random.Generator) -> SeedResult:
    """Generate theta fresh RR sets and greedily pick k seeds."""
    if theta < 1:
        raise TimError("theta must be >= 1")
    batch = generate_rr_batch(graph, model, theta, rng)
    collection = RRCollection.from_batch(batch, graph.node_count)
    return select_from_collection(graph, collection, k)


def run_tim(graph: Graph, model: ModelSpec, params: TimParams) -> SeedResult:
    """Full pipeline: estimate KPT* (and KPT+ for TIM+), derive theta,
    select seeds. ell is inflated internally so the end-to-end success
    probability is 1 - n^-ell despite the union bound over phases."""
    n = graph.node_count
    params.validate(n)
    rng = np.random.default_rng(params.master_seed)
    t_start = time.perf_counter()

    if n == 1:
        result = node_selection(graph, model, params.k, 1, rng)
        result.trace = EstimationTrace(
            kpt_star=1.0, kpt_plus=None, lambda_=float("nan"),
            lambda_prime=None, theta=1, iteration_reached=0)
        result.timings = {"total": time.perf_counter() - t_start}
        return result

    plus = params.variant == VARIANT_TIM_PLUS
    inflation = math.log(3.0) if plus else math.log(2.0)
    ell_eff = params.ell * (1.0 + inflation / math.log(n))

    t0 = time.perf_counter()
    estimate = kpt_estimation(graph, model, params.k, ell_eff, rng)
    t1 = time.perf_counter()

    kpt_plus = None
    lambda_prime = None
    eps_prime = None
    refine_sets = 0
    bound = estimate.kpt_star
    if plus:
        if params.epsilon_prime is not None:
            eps_prime = max(params.epsilon_prime,
                            params.epsilon / math.sqrt(params.k))
        else:
            eps_prime = default_epsilon_prime(params.k, ell_eff, params.epsilon)
        refined = refine_kpt(graph, model, params.k, ell_eff,
                             estimate.kpt_star, estimate.last_sets,
                             eps_prime, rng)
        kpt_plus = refined.kpt_plus
        lambda_prime = refined.lambda_prime
        refine_sets = refined.theta_prime
        bound = kpt_plus
    t2 = time.perf_counter()

    lam = compute_lambda(n, params.k, params.epsilon, ell_eff)
    theta = max(1, math.ceil(lam / bound))
    result = node_selection(graph, model, params.k, theta, rng)
    t3 = time.perf_counter()

    result.trace = EstimationTrace(
        kpt_star=estimate.kpt_star,
        kpt_plus=kpt_plus,
        lambda_=lam,
        lambda_prime=lambda_prime,
        theta=theta,
        iteration_reached=estimate.iteration_reached,
        iteration_sums=estimate.iteration_sums,
        iteration_counts=estimate.iteration_counts,
        epsilon_prime=eps_prime,
        ell_effective=ell_eff,
    )
    result.rr_sets_generated = estimate.rr_sets_generated + refine_sets + theta
    result.timings = {
        "kpt_estimation": t1 - t0,
        "refine_kpt": t2 - t1,
        "node_selection": t3 - t2,
        "total": t3 - t_start,
    }
    return result
