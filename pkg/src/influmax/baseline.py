"""Monte-Carlo greedy seed selection (the classical baseline).

Each candidate's spread is estimated from fresh forward simulations; the
lazy mode keeps a stale-upper-bound priority queue and re-evaluates only
queue tops. Every estimate draws from a generator derived from
(master_seed, iteration, node), so any estimate shared between the eager
and lazy modes is numerically identical.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .evaluator import simulate_spread
from .graph import Graph
from .models import ModelSpec
from .tim import SeedResult


class GreedyError(Exception):
    pass


@dataclass(frozen=True)
class GreedyConfig:
    r: int = 10000  # Monte-Carlo trials per spread estimate
    lazy: bool = True
    master_seed: int = 0

    def validate(self) -> None:
        if self.r < 1:
            raise GreedyError("r must be >= 1")


def _estimate_rng(master_seed: int, iteration: int, node: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, iteration, node])


def _estimate(graph: Graph, model: ModelSpec, seeds: list[int],
              config: GreedyConfig, iteration: int, node: int) -> float:
    rng = _estimate_rng(config.master_seed, iteration, node)
    return simulate_spread(graph, model, seeds, config.r, rng).mean


def greedy_select(graph: Graph, model: ModelSpec, k: int,
                  config: GreedyConfig | None = None) -> SeedResult:
    """k rounds of estimated marginal-gain maximization.

    Ties break toward the smallest node id. k = 0 returns an empty seed set.
    """
    config = config or GreedyConfig()
    config.validate()
    n = graph.node_count
    if k < 0 or k > n:
        raise GreedyError(f"k={k} must be in [0, n={n}]")
    t_start = time.perf_counter()
    seeds: list[int] = []

    if k > 0 and config.lazy:
        seeds = _select_lazy(graph, model, k, config)
    elif k > 0:
        seeds = _select_eager(graph, model, k, config)

    # node index n is reserved as the "whole current set" estimate key
    spread = (_estimate(graph, model, seeds, config, k, n) if seeds else 0.0)
    return SeedResult(
        seeds=[graph.node_ids[i] for i in seeds],
        seed_indices=seeds,
        covered_fraction=float("nan"),
        estimated_spread=spread,
        timings={"total": time.perf_counter() - t_start},
    )


def _select_eager(graph: Graph, model: ModelSpec, k: int,
                  config: GreedyConfig) -> list[int]:
    n = graph.node_count
    seeds: list[int] = []
    chosen = set()
    for it in range(k):
        best_node = -1
        best_val = -math.inf
        for v in range(n):
            if v in chosen:
                continue
            val = _estimate(graph, model, seeds + [v], config, it, v)
            if val > best_val:
                best_val = val
                best_node = v
        seeds.append(best_node)
        chosen.add(best_node)
    return seeds


def _select_lazy(graph: Graph, model: ModelSpec, k: int,
                 config: GreedyConfig) -> list[int]:
    n = graph.node_count
    base = 0.0
    # heap entries: (-gain, node, iteration the gain was computed in)
    heap = [(-_estimate(graph, model, [v], config, 0, v), v, 0) for v in range(n)]
    heapq.heapify(heap)
    seeds: list[int] = []
    for it in range(k):
        while True:
            neg_gain, v, stamp = heapq.heappop(heap)
            if stamp == it:
                seeds.append(v)
                base -= neg_gain
                break
            val = _estimate(graph, model, seeds + [v], config, it, v)
            heapq.heappush(heap, (-(val - base), v, it))
    return seeds


def required_r(n: int, k: int, ell: float, epsilon: float, opt: float) -> float:
    """Trial count sufficient for greedy's approximation guarantee; grows as
    1/epsilon^2 and shrinks with OPT. Exposed for docs and benchmarks."""
    if opt <= 0:
        raise GreedyError("opt must be positive")
    return ((8.0 * k * k + 2.0 * k * epsilon) * n
            * ((ell + 1.0) * math.log(n) + math.log(k))
            / (epsilon * epsilon * opt))
