"""Jitted inner loops for RR-set generation and forward simulation.

All kernels take an explicit numpy Generator so streams stay reproducible,
and use a stamp trick on the ``mark`` arrays so per-call clearing is O(1).
Each kernel mirrors the pure-Python reference paths in sampler/evaluator;
the test suite checks they consume the RNG identically.
"""

from __future__ import annotations

from numba import njit


@njit(cache=True)
def ic_rr_chunk(rng, max_sets, in_off, in_src, in_prob, indeg,
                mark, stamp0, queue, members, roots, sizes, widths):
    """Generate up to max_sets RR sets via randomized reverse BFS (IC).

    Stops early if the member buffer cannot be guaranteed to fit another
    set. Returns (sets completed, members written).
    """
    n = mark.size
    cap = members.size
    pos = 0
    done = 0
    for s in range(max_sets):
        if cap - pos < n:
            break
        stamp = stamp0 + s
        root = rng.integers(0, n)
        mark[root] = stamp
        queue[0] = root
        head = 0
        tail = 1
        members[pos] = root
        pos += 1
        w = indeg[root]
        size = 1
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(in_off[v], in_off[v + 1]):
                if rng.random() < in_prob[e]:
                    u = in_src[e]
                    if mark[u] != stamp:
                        mark[u] = stamp
                        queue[tail] = u
                        tail += 1
                        members[pos] = u
                        pos += 1
                        w += indeg[u]
                        size += 1
        roots[done] = root
        sizes[done] = size
        widths[done] = w
        done += 1
    return done, pos


@njit(cache=True)
def lt_rr_chunk(rng, max_sets, in_off, in_src, cumw, indeg,
                mark, stamp0, queue, members, roots, sizes, widths):
    """RR sets under the linear-threshold triggering semantics: each visited
    node draws one random number to pick a single incoming edge."""
    n = mark.size
    cap = members.size
    pos = 0
    done = 0
    for s in range(max_sets):
        if cap - pos < n:
            break
        stamp = stamp0 + s
        root = rng.integers(0, n)
        mark[root] = stamp
        queue[0] = root
        head = 0
        tail = 1
        members[pos] = root
        pos += 1
        w = indeg[root]
        size = 1
        while head < tail:
            v = queue[head]
            head += 1
            lo = in_off[v]
            hi = in_off[v + 1]
            if hi == lo:
                continue
            x = rng.random()
            e = lo
            while e < hi - 1 and cumw[e] <= x:
                e += 1
            u = in_src[e]
            if mark[u] != stamp:
                mark[u] = stamp
                queue[tail] = u
                tail += 1
                members[pos] = u
                pos += 1
                w += indeg[u]
                size += 1
        roots[done] = root
        sizes[done] = size
        widths[done] = w
        done += 1
    return done, pos


@njit(cache=True)
def ic_forward_chunk(rng, trials, out_off, out_dst, out_prob,
                     seeds, mark, stamp0, queue):
    """Forward IC cascades from a fixed seed set; returns (sum, sum of squares)
    of the activated-node counts over the trials."""
    total = 0.0
    total_sq = 0.0
    for t in range(trials):
        stamp = stamp0 + t
        head = 0
        tail = 0
        for i in range(seeds.size):
            s = seeds[i]
            if mark[s] != stamp:
                mark[s] = stamp
                queue[tail] = s
                tail += 1
        count = tail
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(out_off[u], out_off[u + 1]):
                v = out_dst[e]
                if mark[v] != stamp:
                    if rng.random() < out_prob[e]:
                        mark[v] = stamp
                        queue[tail] = v
                        tail += 1
                        count += 1
        total += count
        total_sq += count * count
    return total, total_sq


@njit(cache=True)
def lt_forward_chunk(rng, trials, out_off, out_dst, in_off, in_src, cumw,
                     seeds, mark, trig, trig_mark, stamp0, queue):
    """Forward LT cascades with lazy trigger realization: a node's single
    trigger neighbor is drawn once, the first time an in-neighbor fires."""
    total = 0.0
    total_sq = 0.0
    for t in range(trials):
        stamp = stamp0 + t
        head = 0
        tail = 0
        for i in range(seeds.size):
            s = seeds[i]
            if mark[s] != stamp:
                mark[s] = stamp
                queue[tail] = s
                tail += 1
        count = tail
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(out_off[u], out_off[u + 1]):
                v = out_dst[e]
                if mark[v] == stamp:
                    continue
                if trig_mark[v] != stamp:
                    trig_mark[v] = stamp
                    lo = in_off[v]
                    hi = in_off[v + 1]
                    x = rng.random()
                    ej = lo
                    while ej < hi - 1 and cumw[ej] <= x:
                        ej += 1
                    trig[v] = in_src[ej]
                if trig[v] == u:
                    mark[v] = stamp
                    queue[tail] = v
                    tail += 1
                    count += 1
        total += count
        total_sq += count * count
    return total, total_sq
