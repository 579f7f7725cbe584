"""RR-set collections with an inverted index, and greedy maximum coverage.

The greedy loop keeps an eager per-node counter of uncovered sets; every
(node, set) incidence is touched a constant number of times, so selection is
linear in the total size of the collection.
"""

from __future__ import annotations

import numpy as np

from .sampler import RRBatch, RRSet


class CoverageError(Exception):
    pass


def _ragged_gather(offsets: np.ndarray, members: np.ndarray,
                   set_ids: np.ndarray) -> np.ndarray:
    """Concatenate members[offsets[j]:offsets[j+1]] for all j in set_ids."""
    if set_ids.size == 0:
        return members[:0]
    starts = offsets[set_ids]
    lens = offsets[set_ids + 1] - starts
    total = int(lens.sum())
    prefix = np.concatenate(([0], np.cumsum(lens)[:-1]))
    idx = np.repeat(starts - prefix, lens) + np.arange(total)
    return members[idx]


class RRCollection:
    """A bag of RR sets over nodes 0..n-1 with a node -> set-ids index."""

    def __init__(self, offsets: np.ndarray, members: np.ndarray, node_count: int,
                 roots: np.ndarray | None = None, widths: np.ndarray | None = None):
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.members = np.asarray(members, dtype=np.int32)
        self.node_count = int(node_count)
        self.roots = roots
        self.widths = widths
        if self.offsets.size < 1 or self.offsets[0] != 0 or self.offsets[-1] != self.members.size:
            raise CoverageError("malformed offsets")
        if self.members.size and (self.members.min() < 0 or self.members.max() >= node_count):
            raise CoverageError("member node id out of range")
        # Inverted index as CSR: sets containing node u are
        # index_sets[index_offsets[u]:index_offsets[u+1]].
        set_of_member = np.repeat(
            np.arange(self.num_sets, dtype=np.int64), np.diff(self.offsets))
        order = np.argsort(self.members, kind="stable")
        self.index_sets = set_of_member[order]
        self.index_offsets = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.members, minlength=node_count),
                  out=self.index_offsets[1:])

    @property
    def num_sets(self) -> int:
        return self.offsets.size - 1

    @property
    def total_incidences(self) -> int:
        return int(self.members.size)

    @classmethod
    def from_batch(cls, batch: RRBatch, node_count: int) -> "RRCollection":
        return cls(batch.offsets, batch.members, node_count,
                   roots=batch.roots, widths=batch.widths)

    @classmethod
    def from_rr_sets(cls, rr_sets: list[RRSet], node_count: int) -> "RRCollection":
        offsets = np.zeros(len(rr_sets) + 1, dtype=np.int64)
        flat: list[int] = []
        for j, r in enumerate(rr_sets):
            flat.extend(sorted(r.members))
            offsets[j + 1] = len(flat)
        return cls(offsets, np.asarray(flat, dtype=np.int32), node_count)

    def members_of(self, j: int) -> np.ndarray:
        return self.members[self.offsets[j]:self.offsets[j + 1]]

    def sets_containing(self, u: int) -> np.ndarray:
        return self.index_sets[self.index_offsets[u]:self.index_offsets[u + 1]]


def fraction_covered(collection: RRCollection, seeds) -> float:
    """Fraction of RR sets intersected by the seed set."""
    if collection.num_sets == 0:
        raise CoverageError("fraction_covered is undefined on an empty collection")
    covered = np.zeros(collection.num_sets, dtype=bool)
    for u in seeds:
        covered[collection.sets_containing(int(u))] = True
    return float(covered.sum()) / collection.num_sets


def greedy_max_coverage(collection: RRCollection, k: int,
                        stats: dict | None = None) -> tuple[list[int], int]:
    """Pick min(k, n) nodes greedily by current uncovered-set count.

    Ties break toward the smallest node id. If every set is covered before
    the quota is filled, the remaining picks are the smallest-id unused
    nodes (their marginal coverage is zero; padding never hurts since the
    spread objective is monotone).
    """
    if k < 1:
        raise CoverageError("k must be >= 1")
    n = collection.node_count
    cover_count = np.bincount(collection.members, minlength=n).astype(np.int64)
    covered = np.zeros(collection.num_sets, dtype=bool)
    touches = collection.total_incidences  # initial counting pass
    seeds: list[int] = []
    covered_total = 0
    for _ in range(min(k, n)):
        u = int(np.argmax(cover_count))  # first max <=> smallest id
        seeds.append(u)
        candidate_sets = collection.sets_containing(u)
        newly = candidate_sets[~covered[candidate_sets]]
        covered[newly] = True
        covered_total += int(newly.size)
        nodes = _ragged_gather(collection.offsets, collection.members, newly)
        touches += nodes.size + candidate_sets.size
        if nodes.size:
            cover_count -= np.bincount(nodes, minlength=n)
        cover_count[u] = -1  # never re-pick
    if stats is not None:
        stats["incidence_touches"] = touches
    return seeds, covered_total
