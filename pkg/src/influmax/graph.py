"""Immutable directed graph with reverse-adjacency (CSR) storage.

The primary layout is by incoming edges, since RR-set generation only ever
walks edges backwards. A forward (outgoing) layout is kept alongside for the
Monte-Carlo simulator. Node ids from the input file are densely remapped to
0..n-1 in first-appearance order; the original tokens are retained for output.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import IO, Iterable, Sequence

import numpy as np

CACHE_FORMAT_VERSION = 1


class GraphError(Exception):
    """Base class for graph construction errors."""


class ParseError(GraphError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True, eq=False)
class Graph:
    """Directed multigraph in CSR form, immutable after construction.

    ``in_sources[in_offsets[v]:in_offsets[v+1]]`` are the tails of v's
    incoming edges, in input order. ``edge_prob`` / ``lt_weight`` /
    ``lt_cumweight`` are per-edge payloads aligned with the in-CSR layout;
    they are None until a diffusion model assigns them (or, for
    ``edge_prob``, when the input file carried an explicit column).
    """

    node_count: int
    edge_count: int
    node_ids: tuple
    in_offsets: np.ndarray
    in_sources: np.ndarray
    out_offsets: np.ndarray
    out_targets: np.ndarray
    out_edge_pos: np.ndarray  # forward edge -> its position in the in-CSR
    edge_prob: np.ndarray | None = None
    lt_weight: np.ndarray | None = None
    lt_cumweight: np.ndarray | None = None

    def in_degree(self, v: int) -> int:
        if not 0 <= v < self.node_count:
            raise GraphError(f"node {v} out of range [0, {self.node_count})")
        return int(self.in_offsets[v + 1] - self.in_offsets[v])

    def out_degree(self, v: int) -> int:
        if not 0 <= v < self.node_count:
            raise GraphError(f"node {v} out of range [0, {self.node_count})")
        return int(self.out_offsets[v + 1] - self.out_offsets[v])

    @property
    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_offsets)

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_offsets)

    def in_neighbors(self, v: int) -> np.ndarray:
        if not 0 <= v < self.node_count:
            raise GraphError(f"node {v} out of range [0, {self.node_count})")
        return self.in_sources[self.in_offsets[v]:self.in_offsets[v + 1]]

    def index_of(self, node_id) -> int:
        try:
            return self._id_index[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id!r}") from None

    @property
    def _id_index(self) -> dict:
        # lazily built, cached on the instance (frozen dataclass workaround)
        cached = self.__dict__.get("_id_index_cache")
        if cached is None:
            cached = {nid: i for i, nid in enumerate(self.node_ids)}
            object.__setattr__(self, "_id_index_cache", cached)
        return cached

    def with_payload(self, **payload) -> "Graph":
        return replace(self, **payload)

    def edges(self) -> Iterable[tuple[int, int, float | None]]:
        """Yield (u, v, p) in in-CSR order (grouped by head node)."""
        for v in range(self.node_count):
            for e in range(self.in_offsets[v], self.in_offsets[v + 1]):
                p = float(self.edge_prob[e]) if self.edge_prob is not None else None
                yield int(self.in_sources[e]), v, p


def in_degree(graph: Graph, v: int) -> int:
    return graph.in_degree(v)


def from_edge_arrays(
    tails: Sequence[int],
    heads: Sequence[int],
    node_count: int,
    probs: Sequence[float] | None = None,
    node_ids: Sequence | None = None,
) -> Graph:
    """Build a Graph from parallel edge arrays of already-dense node indices."""
    if node_count < 1:
        raise GraphError("graph must have at least one node")
    tails = np.asarray(tails, dtype=np.int32)
    heads = np.asarray(heads, dtype=np.int32)
    m = tails.size
    if heads.size != m:
        raise GraphError("tails and heads must have equal length")
    if m and (tails.min() < 0 or heads.min() < 0
              or tails.max() >= node_count or heads.max() >= node_count):
        raise GraphError("edge endpoint out of range")
    prob_arr = None
    if probs is not None:
        prob_arr = np.asarray(probs, dtype=np.float64)
        if prob_arr.size != m:
            raise GraphError("probs must align with edges")
        if m and (prob_arr.min() < 0.0 or prob_arr.max() > 1.0):
            raise GraphError("edge probability outside [0, 1]")

    # Stable counting sorts keep per-node edge order equal to input order.
    in_order = np.argsort(heads, kind="stable")
    in_sources = tails[in_order]
    in_offsets = np.zeros(node_count + 1, dtype=np.int64)
    np.cumsum(np.bincount(heads, minlength=node_count), out=in_offsets[1:])

    out_order = np.argsort(tails, kind="stable")
    out_targets = heads[out_order]
    out_offsets = np.zeros(node_count + 1, dtype=np.int64)
    np.cumsum(np.bincount(tails, minlength=node_count), out=out_offsets[1:])

    # Map each forward edge to its slot in the in-CSR so payload lookups work.
    in_pos_of_edge = np.empty(m, dtype=np.int64)
    in_pos_of_edge[in_order] = np.arange(m)
    out_edge_pos = in_pos_of_edge[out_order]

    if node_ids is None:
        node_ids = tuple(range(node_count))
    else:
        node_ids = tuple(node_ids)
        if len(node_ids) != node_count:
            raise GraphError("node_ids must have length node_count")

    return Graph(
        node_count=node_count,
        edge_count=int(m),
        node_ids=node_ids,
        in_offsets=in_offsets,
        in_sources=in_sources,
        out_offsets=out_offsets,
        out_targets=out_targets,
        out_edge_pos=out_edge_pos,
        edge_prob=prob_arr[in_order] if prob_arr is not None else None,
    )


def load_edge_list(source: IO[str] | Iterable[str], directed: bool = True) -> Graph:
    """Parse a whitespace-separated edge list ("u v" or "u v p" per line).

    Lines starting with '#' and blank lines are ignored. Node ids may be
    arbitrary tokens and are densely reindexed in first-appearance order.
    With ``directed=False`` every input line yields two directed edges.
    Duplicate (u, v) lines are kept as parallel edges.
    """
    index: dict = {}
    ids: list = []
    tails: list[int] = []
    heads: list[int] = []
    probs: list[float] = []
    has_prob: bool | None = None

    def intern(token):
        idx = index.get(token)
        if idx is None:
            idx = len(ids)
            index[token] = idx
            ids.append(token)
        return idx

    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'u v' or 'u v p', got {line!r}", lineno)
        if has_prob is None:
            has_prob = len(parts) == 3
        elif has_prob != (len(parts) == 3):
            raise ParseError("inconsistent column count across lines", lineno)
        u = intern(parts[0])
        v = intern(parts[1])
        if has_prob:
            try:
                p = float(parts[2])
            except ValueError:
                raise ParseError(f"bad probability {parts[2]!r}", lineno) from None
            if not 0.0 <= p <= 1.0:
                raise ParseError(f"probability {p} outside [0, 1]", lineno)
        tails.append(u)
        heads.append(v)
        if has_prob:
            probs.append(p)
        if not directed:
            tails.append(v)
            heads.append(u)
            if has_prob:
                probs.append(p)

    if not ids:
        raise GraphError("empty input: at least one node is required")
    return from_edge_arrays(
        tails, heads, len(ids),
        probs=probs if has_prob else None,
        node_ids=ids,
    )


def dump_edge_list(graph: Graph) -> str:
    """Serialize edges as text, grouped by head node (convenience only;
    use save_cache/load_cache for an exact structural round trip)."""
    lines = []
    for u, v, p in graph.edges():
        uid, vid = graph.node_ids[u], graph.node_ids[v]
        if p is None:
            lines.append(f"{uid} {vid}")
        else:
            lines.append(f"{uid} {vid} {p!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def save_cache(graph: Graph, path) -> None:
    """Versioned binary cache; round-trip exact including payloads and ids."""
    arrays = {
        "version": np.array([CACHE_FORMAT_VERSION]),
        "node_count": np.array([graph.node_count]),
        "node_ids": np.array(list(graph.node_ids), dtype=object),
        "in_offsets": graph.in_offsets,
        "in_sources": graph.in_sources,
        "out_offsets": graph.out_offsets,
        "out_targets": graph.out_targets,
        "out_edge_pos": graph.out_edge_pos,
    }
    for name in ("edge_prob", "lt_weight", "lt_cumweight"):
        arr = getattr(graph, name)
        if arr is not None:
            arrays[name] = arr
    np.savez(path, **arrays)


def load_cache(path) -> Graph:
    with np.load(path, allow_pickle=True) as data:
        version = int(data["version"][0])
        if version != CACHE_FORMAT_VERSION:
            raise GraphError(f"unsupported cache version {version}")
        return Graph(
            node_count=int(data["node_count"][0]),
            edge_count=int(data["in_sources"].size),
            node_ids=tuple(data["node_ids"].tolist()),
            in_offsets=data["in_offsets"],
            in_sources=data["in_sources"],
            out_offsets=data["out_offsets"],
            out_targets=data["out_targets"],
            out_edge_pos=data["out_edge_pos"],
            edge_prob=data["edge_prob"] if "edge_prob" in data else None,
            lt_weight=data["lt_weight"] if "lt_weight" in data else None,
            lt_cumweight=data["lt_cumweight"] if "lt_cumweight" in data else None,
        )


def structural_equal(a: Graph, b: Graph) -> bool:
    if (a.node_count, a.edge_count, a.node_ids) != (b.node_count, b.edge_count, b.node_ids):
        return False
    for name in ("in_offsets", "in_sources", "out_offsets", "out_targets",
                 "out_edge_pos", "edge_prob", "lt_weight", "lt_cumweight"):
        x, y = getattr(a, name), getattr(b, name)
        if (x is None) != (y is None):
            return False
        if x is not None and not np.array_equal(x, y):
            return False
    return True
