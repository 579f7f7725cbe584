"""Diffusion model specifications and trigger-set sampling.

Supported kinds:
  - ic: independent cascade with explicit per-edge probabilities
  - wc: weighted cascade, p(e) = 1 / in-degree of the edge's head
  - lt: linear threshold with uniformly-drawn, per-node normalized weights
  - trigger: user-supplied per-node trigger-set sampler

Under the triggering-model view, IC corresponds to including each in-neighbor
independently with its edge probability, and LT to picking exactly one
in-neighbor with probability equal to its weight.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import Graph

LT_WEIGHT_TOLERANCE = 1e-9

TriggerSampler = Callable[[Graph, int, np.random.Generator], set]


class ModelKind(str, enum.Enum):
    IC = "ic"
    WC = "wc"
    LT = "lt"
    TRIGGER = "trigger"


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    trigger_sampler: TriggerSampler | None = None

    def __post_init__(self):
        if self.kind is ModelKind.TRIGGER and self.trigger_sampler is None:
            raise ModelError("trigger model requires a trigger_sampler")


IC = ModelSpec(ModelKind.IC)
WC = ModelSpec(ModelKind.WC)
LT = ModelSpec(ModelKind.LT)


def assign_weighted_cascade(graph: Graph) -> Graph:
    """Set p(e) = 1/in_degree(head of e) on every edge.

    The graph must not carry explicit probabilities already.
    """
    if graph.edge_prob is not None:
        raise ModelError("weighted cascade requires a graph without explicit probabilities")
    indeg = graph.in_degrees
    prob = np.empty(graph.edge_count, dtype=np.float64)
    for v in range(graph.node_count):
        lo, hi = graph.in_offsets[v], graph.in_offsets[v + 1]
        if hi > lo:
            prob[lo:hi] = 1.0 / indeg[v]
    return graph.with_payload(edge_prob=prob)


def assign_lt_uniform(graph: Graph, rng: np.random.Generator) -> Graph:
    """Draw Uniform[0,1] weights per incoming edge and normalize per node.

    Weights are stored in adjacency order; per-node weights sum to 1 within
    LT_WEIGHT_TOLERANCE. Nodes without incoming edges get no weights.
    """
    weight = np.zeros(graph.edge_count, dtype=np.float64)
    cumweight = np.zeros(graph.edge_count, dtype=np.float64)
    for v in range(graph.node_count):
        lo, hi = int(graph.in_offsets[v]), int(graph.in_offsets[v + 1])
        d = hi - lo
        if d == 0:
            continue
        draws = rng.random(d)
        while draws.sum() == 0.0:  # probability-zero guard
            draws = rng.random(d)
        w = draws / draws.sum()
        weight[lo:hi] = w
        cumweight[lo:hi] = np.cumsum(w)
        cumweight[hi - 1] = 1.0  # kill rounding drift at the boundary
    return graph.with_payload(lt_weight=weight, lt_cumweight=cumweight)


def validate_payload(model: ModelSpec, graph: Graph) -> None:
    if model.kind in (ModelKind.IC, ModelKind.WC):
        if graph.edge_prob is None:
            raise ModelError(f"model {model.kind.value!r} requires edge probabilities on the graph")
    elif model.kind is ModelKind.LT:
        if graph.lt_weight is None or graph.lt_cumweight is None:
            raise ModelError("model 'lt' requires linear-threshold weights on the graph")
        for v in range(graph.node_count):
            lo, hi = graph.in_offsets[v], graph.in_offsets[v + 1]
            if hi > lo:
                total = graph.lt_weight[lo:hi].sum()
                if abs(total - 1.0) > LT_WEIGHT_TOLERANCE:
                    raise ModelError(f"LT weights of node {v} sum to {total}, expected 1")


def sample_trigger_set(model: ModelSpec, graph: Graph, v: int, rng: np.random.Generator) -> set:
    """Draw one trigger set (a set of in-neighbor indices) for node v."""
    if not 0 <= v < graph.node_count:
        raise ModelError(f"node {v} out of range")
    lo, hi = int(graph.in_offsets[v]), int(graph.in_offsets[v + 1])
    if model.kind is ModelKind.TRIGGER:
        return set(model.trigger_sampler(graph, v, rng))
    if model.kind in (ModelKind.IC, ModelKind.WC):
        if graph.edge_prob is None:
            raise ModelError("graph has no edge probabilities")
        out = set()
        for e in range(lo, hi):
            if rng.random() < graph.edge_prob[e]:
                out.add(int(graph.in_sources[e]))
        return out
    # LT: exactly one in-neighbor by weight, or empty when in-degree is 0
    if graph.lt_cumweight is None:
        raise ModelError("graph has no LT weights")
    if hi == lo:
        return set()
    x = rng.random()
    e = lo + int(np.searchsorted(graph.lt_cumweight[lo:hi], x, side="right"))
    e = min(e, hi - 1)
    return {int(graph.in_sources[e])}


def ic_as_trigger(ic_graph: Graph) -> ModelSpec:
    """Custom triggering model equivalent to IC on a prob-annotated graph."""
    if ic_graph.edge_prob is None:
        raise ModelError("graph has no edge probabilities")

    def sampler(graph: Graph, v: int, rng: np.random.Generator) -> set:
        lo, hi = int(graph.in_offsets[v]), int(graph.in_offsets[v + 1])
        return {
            int(graph.in_sources[e])
            for e in range(lo, hi)
            if rng.random() < graph.edge_prob[e]
        }

    return ModelSpec(ModelKind.TRIGGER, trigger_sampler=sampler)
