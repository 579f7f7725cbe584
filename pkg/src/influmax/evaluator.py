"""Ground-truth spread computation.

Two routes:

  * simulate_spread -- Monte-Carlo forward simulation of the diffusion
    process (jitted for IC/WC/LT, pure Python for custom triggering).
  * exact_spread / exhaustive_opt -- brute-force oracles for tiny graphs
    that enumerate every live-edge realization (IC) or every combination of
    per-node trigger picks (LT) and compute reachability exactly. These give
    exact OPT, EPT and KPT values for test assertions.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import Graph
from .models import ModelKind, ModelSpec, sample_trigger_set, validate_payload
from .sampler import kappa_values

_MAX_REALIZATIONS = 1 << 20
_MAX_REACH_CELLS = 1 << 28  # realizations * n^2
_MAX_KPT_TUPLES = 1 << 20


class OracleSizeError(Exception):
    """The instance is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    trials: int
    std_error: float


@dataclass(frozen=True)
class ExactOracleResult:
    opt_value: float
    opt_set: frozenset
    exact_spread: dict
    kpt_exact: float
    ept_exact: float


def _check_seeds(graph: Graph, seeds) -> np.ndarray:
    arr = np.asarray(sorted(int(s) for s in seeds), dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= graph.node_count):
        raise ValueError("seed node out of range")
    if np.unique(arr).size != arr.size:
        raise ValueError("duplicate seed node")
    return arr


def simulate_spread(graph: Graph, model: ModelSpec, seeds, trials: int,
                    rng: np.random.Generator) -> SpreadEstimate:
    """Average activated-node count over independent forward cascades."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    validate_payload(model, graph)
    seed_arr = _check_seeds(graph, seeds)
    if seed_arr.size == 0:
        return SpreadEstimate(0.0, trials, 0.0)

    n = graph.node_count
    if model.kind is ModelKind.TRIGGER:
        counts = np.array([
            _simulate_once_python(graph, model, seed_arr, rng)
            for _ in range(trials)
        ], dtype=np.float64)
        total, total_sq = counts.sum(), (counts * counts).sum()
    else:
        mark = np.zeros(n, dtype=np.int64)
        queue = np.empty(n, dtype=np.int64)
        if model.kind is ModelKind.LT:
            trig = np.zeros(n, dtype=np.int64)
            trig_mark = np.zeros(n, dtype=np.int64)
            total, total_sq = _kernels.lt_forward_chunk(
                rng, trials, graph.out_offsets, graph.out_targets,
                graph.in_offsets, graph.in_sources, graph.lt_cumweight,
                seed_arr, mark, trig, trig_mark, 1, queue)
        else:
            out_prob = graph.edge_prob[graph.out_edge_pos]
            total, total_sq = _kernels.ic_forward_chunk(
                rng, trials, graph.out_offsets, graph.out_targets, out_prob,
                seed_arr, mark, 1, queue)

    mean = total / trials
    if trials > 1:
        var = max(0.0, (total_sq - trials * mean * mean) / (trials - 1))
        se = math.sqrt(var / trials)
    else:
        se = 0.0
    return SpreadEstimate(float(mean), trials, float(se))


def _simulate_once_python(graph: Graph, model: ModelSpec, seeds: np.ndarray,
                          rng: np.random.Generator) -> int:
    """One cascade with lazy trigger realization (reference / custom models)."""
    active = set(int(s) for s in seeds)
    frontier = deque(sorted(active))
    triggers: dict[int, set] = {}
    while frontier:
        u = frontier.popleft()
        lo, hi = int(graph.out_offsets[u]), int(graph.out_offsets[u + 1])
        for e in range(lo, hi):
            v = int(graph.out_targets[e])
            if v in active:
                continue
            if v not in triggers:
                triggers[v] = sample_trigger_set(model, graph, v, rng)
            if u in triggers[v]:
                active.add(v)
                frontier.append(v)
    return len(active)


# ---------------------------------------------------------------------------
# Exact oracles (live-edge / trigger-pick enumeration)
# ---------------------------------------------------------------------------

def _closure(adj: np.ndarray, n: int) -> np.ndarray:
    """Boolean transitive closure with self-reach, batched over axis 0."""
    reach = adj.copy()
    diag = np.arange(n)
    reach[:, diag, diag] = 1
    steps = max(1, math.ceil(math.log2(max(n - 1, 1))))
    for _ in range(steps):
        reach = (np.matmul(reach.astype(np.uint8), reach.astype(np.uint8)) > 0)
    return reach.astype(bool)


def _enumerate_ic(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """All live-edge realizations under IC: (reach (B,n,n), probs (B,))."""
    if graph.edge_prob is None:
        raise ValueError("graph has no edge probabilities")
    n = graph.node_count
    heads = np.repeat(np.arange(n), graph.in_degrees)
    tails = graph.in_sources
    p = graph.edge_prob
    uncertain = np.flatnonzero((p > 0.0) & (p < 1.0))
    nu = uncertain.size
    if nu > 20 or (1 << nu) > _MAX_REALIZATIONS or (1 << nu) * n * n > _MAX_REACH_CELLS:
        raise OracleSizeError(f"{nu} uncertain edges is too many to enumerate")
    B = 1 << nu
    adj = np.zeros((B, n, n), dtype=np.uint8)
    for e in np.flatnonzero(p == 1.0):
        adj[:, tails[e], heads[e]] = 1
    probs = np.ones(B, dtype=np.float64)
    if nu:
        bits = (np.arange(B)[:, None] >> np.arange(nu)) & 1
        for j, e in enumerate(uncertain):
            adj[:, tails[e], heads[e]] |= bits[:, j].astype(np.uint8)
            probs *= np.where(bits[:, j] == 1, p[e], 1.0 - p[e])
    return _closure(adj, n), probs


def _enumerate_lt(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """All per-node trigger picks under LT: (reach (B,n,n), probs (B,))."""
    if graph.lt_weight is None:
        raise ValueError("graph has no LT weights")
    n = graph.node_count
    indeg = graph.in_degrees
    pick_nodes = [v for v in range(n) if indeg[v] > 0]
    B = 1
    for v in pick_nodes:
        B *= int(indeg[v])
        if B > _MAX_REALIZATIONS:
            raise OracleSizeError("too many trigger-pick combinations")
    if B * n * n > _MAX_REACH_CELLS:
        raise OracleSizeError("too many trigger-pick combinations")
    adj = np.zeros((B, n, n), dtype=np.uint8)
    probs = np.ones(B, dtype=np.float64)
    rows = np.arange(B)
    stride = 1
    for v in pick_nodes:
        d = int(indeg[v])
        lo = int(graph.in_offsets[v])
        choice = (rows // stride) % d
        srcs = graph.in_sources[lo:lo + d]
        adj[rows, srcs[choice], v] = 1
        probs *= graph.lt_weight[lo:lo + d][choice]
        stride *= d
    return _closure(adj, n), probs


def _enumerate(graph: Graph, model: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    validate_payload(model, graph)
    if model.kind in (ModelKind.IC, ModelKind.WC):
        return _enumerate_ic(graph)
    if model.kind is ModelKind.LT:
        return _enumerate_lt(graph)
    raise OracleSizeError("exact oracles support only IC/WC and LT models")


def _spread_from_reach(reach: np.ndarray, probs: np.ndarray, seeds) -> float:
    seeds = list(seeds)
    if not seeds:
        return 0.0
    reached = reach[:, seeds, :].any(axis=1)
    return float(probs @ reached.sum(axis=1))


def exact_spread(graph: Graph, model: ModelSpec, seeds) -> float:
    """Exact E[I(S)] by full enumeration of diffusion realizations."""
    seed_arr = _check_seeds(graph, seeds)
    reach, probs = _enumerate(graph, model)
    return _spread_from_reach(reach, probs, seed_arr.tolist())


def exact_ept(graph: Graph, model: ModelSpec) -> float:
    """Exact expected width of a random RR set (uniform root)."""
    reach, probs = _enumerate(graph, model)
    indeg = graph.in_degrees.astype(np.float64)
    # widths[b, v] = total in-degree of nodes that can reach v in realization b
    widths = np.einsum("buv,u->bv", reach, indeg)
    return float((probs @ widths).mean())


def exact_expected_kappa(graph: Graph, model: ModelSpec, k: int) -> float:
    """Exact E[kappa(R)] over uniform roots and all realizations."""
    reach, probs = _enumerate(graph, model)
    indeg = graph.in_degrees.astype(np.float64)
    widths = np.einsum("buv,u->bv", reach, indeg)
    kap = kappa_values(widths, graph.edge_count, k)
    return float((probs @ kap).mean())


def _exact_kpt(graph: Graph, model: ModelSpec, k: int,
               spread_of: dict, reach: np.ndarray, probs: np.ndarray) -> float:
    """KPT by definition: expected spread of k in-degree-proportional samples
    (duplicates collapse into a smaller set)."""
    m = graph.edge_count
    if m == 0:
        return float("nan")
    indeg = graph.in_degrees
    candidates = [v for v in range(graph.node_count) if indeg[v] > 0]
    if len(candidates) ** k > _MAX_KPT_TUPLES:
        raise OracleSizeError("too many sample tuples for exact KPT")
    total = 0.0
    for tup in itertools.product(candidates, repeat=k):
        weight = 1.0
        for v in tup:
            weight *= indeg[v] / m
        key = frozenset(tup)
        if key not in spread_of:
            spread_of[key] = _spread_from_reach(reach, probs, sorted(key))
        total += weight * spread_of[key]
    return total


def exhaustive_opt(graph: Graph, model: ModelSpec, k: int) -> ExactOracleResult:
    """Exact OPT (with an argmax set), exact EPT, and exact KPT."""
    n = graph.node_count
    if not 1 <= k <= n:
        raise ValueError("k must be in [1, n]")
    if math.comb(n, k) > 10_000:
        raise OracleSizeError("too many size-k seed sets to enumerate")
    reach, probs = _enumerate(graph, model)
    indeg = graph.in_degrees.astype(np.float64)

    spread_of: dict = {}
    opt_value = -1.0
    opt_set: frozenset = frozenset()
    for combo in itertools.combinations(range(n), k):
        val = _spread_from_reach(reach, probs, combo)
        spread_of[frozenset(combo)] = val
        if val > opt_value:
            opt_value = val
            opt_set = frozenset(combo)

    widths = np.einsum("buv,u->bv", reach, indeg)
    ept = float((probs @ widths).mean())
    kpt = _exact_kpt(graph, model, k, spread_of, reach, probs)
    return ExactOracleResult(
        opt_value=opt_value,
        opt_set=opt_set,
        exact_spread=spread_of,
        kpt_exact=kpt,
        ept_exact=ept,
    )
