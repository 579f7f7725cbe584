import io

import numpy as np
import pytest

from influmax.graph import Graph, from_edge_arrays, load_edge_list
from influmax.models import assign_weighted_cascade

CHAIN_TEXT = "a b 0.5\nb c 0.5\n"


def build_chain() -> Graph:
    """a -> b (0.5) -> c (0.5); exact spreads 1.75 / 1.5 / 1.0."""
    return load_edge_list(io.StringIO(CHAIN_TEXT))


def build_k4() -> Graph:
    """Complete digraph on 4 nodes, every edge p = 1."""
    tails, heads = [], []
    for u in range(4):
        for v in range(4):
            if u != v:
                tails.append(u)
                heads.append(v)
    return from_edge_arrays(tails, heads, 4, probs=[1.0] * len(tails))


def build_isolated(n: int = 1) -> Graph:
    """n nodes, no edges, with an (empty) IC payload attached."""
    return from_edge_arrays([], [], n, probs=[])


def build_random_ic(rng: np.random.Generator, n: int = 8,
                    max_edges: int = 16) -> Graph:
    """Random simple digraph with WC probabilities; always has >= 1 edge."""
    pairs = set()
    target = int(rng.integers(max(1, n // 2), max_edges + 1))
    while len(pairs) < target:
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        if u != v:
            pairs.add((u, v))
    tails, heads = zip(*sorted(pairs))
    return assign_weighted_cascade(from_edge_arrays(tails, heads, n))


@pytest.fixture
def chain() -> Graph:
    return build_chain()


@pytest.fixture
def k4() -> Graph:
    return build_k4()
