"""Random reverse-reachable (RR) set generation and per-set statistics.

An RR set is generated by a randomized reverse BFS from a uniformly drawn
root: under IC each incoming edge of a dequeued node is traversed with its
edge probability; under LT each dequeued node picks a single incoming edge by
weight. A node's randomness is realized the first time it is processed and
never re-sampled, which is what makes the visited set equivalent to working
on a materialized live-edge graph.

Bulk generation goes through jitted kernels; ``rr_set_from_root`` is the
pure-Python reference that consumes the RNG identically.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import Graph
from .models import ModelKind, ModelSpec, sample_trigger_set, validate_payload

# Member buffer per kernel call; chunks amortize call overhead while keeping
# memory bounded even for huge theta.
_CHUNK_CAPACITY = 1 << 18


@dataclass(frozen=True)
class RRSet:
    root: int
    members: frozenset
    width: int


@dataclass(frozen=True)
class RRBatch:
    """Flat storage for many RR sets: members of set j are
    members[offsets[j]:offsets[j+1]]."""

    offsets: np.ndarray
    members: np.ndarray
    roots: np.ndarray
    widths: np.ndarray

    @property
    def num_sets(self) -> int:
        return self.offsets.size - 1

    def members_of(self, j: int) -> np.ndarray:
        return self.members[self.offsets[j]:self.offsets[j + 1]]

    def to_rr_sets(self) -> list[RRSet]:
        return [
            RRSet(int(self.roots[j]), frozenset(int(u) for u in self.members_of(j)),
                  int(self.widths[j]))
            for j in range(self.num_sets)
        ]


def empty_batch() -> RRBatch:
    return RRBatch(
        offsets=np.zeros(1, dtype=np.int64),
        members=np.empty(0, dtype=np.int32),
        roots=np.empty(0, dtype=np.int32),
        widths=np.empty(0, dtype=np.int64),
    )


def kappa_from_width(width: int, m: int, k: int) -> float:
    """1 - (1 - w/m)^k, stable for tiny w/m and exact at the boundaries.

    Defined as 0 when m = 0 (the KPT fallback handles edgeless graphs).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if m == 0:
        return 0.0
    if not 0 <= width <= m:
        raise ValueError(f"width {width} outside [0, {m}]")
    if width == 0:
        return 0.0
    if width == m:
        return 1.0
    return -math.expm1(k * math.log1p(-width / m))


def kappa(rr_set: RRSet, m: int, k: int) -> float:
    return kappa_from_width(rr_set.width, m, k)


def kappa_values(widths: np.ndarray, m: int, k: int) -> np.ndarray:
    """Vectorized kappa over an array of widths."""
    if k < 1:
        raise ValueError("k must be >= 1")
    widths = np.asarray(widths, dtype=np.float64)
    if m == 0:
        return np.zeros_like(widths)
    with np.errstate(divide="ignore"):
        out = -np.expm1(k * np.log1p(-widths / m))
    out[widths == 0] = 0.0
    out[widths == m] = 1.0
    return out


def _reference_rr_from_root(graph: Graph, model: ModelSpec, root: int,
                            rng: np.random.Generator) -> tuple[list[int], int]:
    indeg = graph.in_degrees
    visited = {root}
    order = [root]
    width = int(indeg[root])
    queue = deque([root])
    while queue:
        v = queue.popleft()
        lo, hi = int(graph.in_offsets[v]), int(graph.in_offsets[v + 1])
        if model.kind in (ModelKind.IC, ModelKind.WC):
            candidates = [
                int(graph.in_sources[e])
                for e in range(lo, hi)
                if rng.random() < graph.edge_prob[e]
            ]
        elif model.kind is ModelKind.LT:
            if hi == lo:
                continue
            x = rng.random()
            e = lo
            while e < hi - 1 and graph.lt_cumweight[e] <= x:
                e += 1
            candidates = [int(graph.in_sources[e])]
        else:
            candidates = sorted(sample_trigger_set(model, graph, v, rng))
        for u in candidates:
            if u not in visited:
                visited.add(u)
                order.append(u)
                width += int(indeg[u])
                queue.append(u)
    return order, width


def rr_set_from_root(graph: Graph, model: ModelSpec, root: int,
                     rng: np.random.Generator) -> RRSet:
    """Reference (non-jitted) RR-set generation for a fixed root."""
    validate_payload(model, graph)
    if not 0 <= root < graph.node_count:
        raise ValueError(f"root {root} out of range")
    order, width = _reference_rr_from_root(graph, model, root, rng)
    return RRSet(root=root, members=frozenset(order), width=width)


def generate_rr_set(graph: Graph, model: ModelSpec, rng: np.random.Generator) -> RRSet:
    """One random RR set: uniform root, then randomized reverse BFS."""
    validate_payload(model, graph)
    root = int(rng.integers(0, graph.node_count))
    order, width = _reference_rr_from_root(graph, model, root, rng)
    return RRSet(root=root, members=frozenset(order), width=width)


def generate_rr_batch(graph: Graph, model: ModelSpec, count: int,
                      rng: np.random.Generator) -> RRBatch:
    """Generate ``count`` independent random RR sets (flat layout)."""
    if count < 0:
        raise ValueError("count must be >= 0")
    validate_payload(model, graph)
    if count == 0:
        return empty_batch()
    if model.kind is ModelKind.TRIGGER:
        return _python_batch(graph, model, count, rng)

    n = graph.node_count
    in_off = graph.in_offsets
    in_src = graph.in_sources
    indeg = graph.in_degrees.astype(np.int64)
    mark = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    cap = max(2 * n, _CHUNK_CAPACITY)
    members_buf = np.empty(cap, dtype=np.int32)
    roots_buf = np.empty(count, dtype=np.int32)
    sizes_buf = np.empty(count, dtype=np.int64)
    widths_buf = np.empty(count, dtype=np.int64)

    member_chunks = []
    sizes_chunks = []
    roots_chunks = []
    widths_chunks = []
    done_total = 0
    stamp0 = 1
    while done_total < count:
        remaining = count - done_total
        if model.kind is ModelKind.LT:
            done, pos = _kernels.lt_rr_chunk(
                rng, remaining, in_off, in_src, graph.lt_cumweight, indeg,
                mark, stamp0, queue, members_buf,
                roots_buf, sizes_buf, widths_buf)
        else:
            done, pos = _kernels.ic_rr_chunk(
                rng, remaining, in_off, in_src, graph.edge_prob, indeg,
                mark, stamp0, queue, members_buf,
                roots_buf, sizes_buf, widths_buf)
        member_chunks.append(members_buf[:pos].copy())
        sizes_chunks.append(sizes_buf[:done].copy())
        roots_chunks.append(roots_buf[:done].copy())
        widths_chunks.append(widths_buf[:done].copy())
        done_total += done
        stamp0 += done

    members = np.concatenate(member_chunks)
    sizes = np.concatenate(sizes_chunks)
    offsets = np.zeros(count + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    return RRBatch(
        offsets=offsets,
        members=members,
        roots=np.concatenate(roots_chunks),
        widths=np.concatenate(widths_chunks),
    )


def _python_batch(graph: Graph, model: ModelSpec, count: int,
                  rng: np.random.Generator) -> RRBatch:
    members: list[int] = []
    offsets = np.zeros(count + 1, dtype=np.int64)
    roots = np.empty(count, dtype=np.int32)
    widths = np.empty(count, dtype=np.int64)
    for j in range(count):
        root = int(rng.integers(0, graph.node_count))
        order, width = _reference_rr_from_root(graph, model, root, rng)
        members.extend(order)
        offsets[j + 1] = len(members)
        roots[j] = root
        widths[j] = width
    return RRBatch(
        offsets=offsets,
        members=np.asarray(members, dtype=np.int32),
        roots=roots,
        widths=widths,
    )
