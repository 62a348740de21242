"""Exact weighted rooted homomorphism counting for treewidth <= 2 patterns.

Three polynomial algorithms plus a guarded brute-force fallback:

* cycles: counts[k][v] is the v-th diagonal entry of (A W)^k, with W the
  diagonal matrix of one feature channel; all requested k come out of one
  pass of iterated multiplication.
* paths rooted at an endpoint: the linear recursion h_1 = w,
  h_k = (A h_{k-1}) * w.
* arbitrary rooted trees: post-order dynamic programming over the pattern,
  one accumulator vector per pattern vertex, initialized to w (the
  single-vertex base case) and folded into the parent as an adjacency
  multiply plus an elementwise product.

Plain (all-ones) graphs run on object-dtype arrays of Python ints, so the
results are exact however large the counts get; weighted graphs run in
float64.  Accumulation order is fixed by the algorithms themselves, so equal
inputs give byte-identical outputs in a single-threaded run.
"""

from __future__ import annotations

import numpy as np

from . import oracle
from .graphs import FeaturedGraph
from .patterns import RootedPattern

ORACLE_FALLBACK_MAX_ORDER = 6


class CountingError(ValueError):
    """Pattern/argument combination the engine cannot serve."""


def _exact_adjacency(g: FeaturedGraph) -> np.ndarray:
    a = np.zeros((g.n, g.n), dtype=object)
    a[:] = 0
    for u, v in g.edges:
        a[u, v] = 1
        a[v, u] = 1
    return a


def _ones_exact(n: int) -> np.ndarray:
    out = np.empty(n, dtype=object)
    out[:] = 1
    return out


def count_cycles(g: FeaturedGraph, channel: int, ks) -> dict[int, np.ndarray]:
    """Weighted closed-walk counts: k -> vector of (A W)^k diagonal entries.

    Entry v counts homomorphisms of the k-cycle rooted at v, weighting each
    by the product of channel values over the k visited nodes.  Requires
    every k >= 2; k = 2 is legal (weighted closed 2-walks) though the cycle
    family never asks for it.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks:
        raise CountingError("no cycle lengths requested")
    if ks[0] < 2:
        raise CountingError(f"cycle length must be >= 2, got {ks[0]}")
    w = g.channel(channel)
    plain = g.is_plain()
    if plain:
        m = _exact_adjacency(g)
    else:
        m = g.adjacency * w[np.newaxis, :]
    out: dict[int, np.ndarray] = {}
    power = m
    for k in range(2, ks[-1] + 1):
        power = power.dot(m) if plain else power @ m
        if k in ks:
            out[k] = np.diagonal(power).copy()
    return out


def count_paths(g: FeaturedGraph, channel: int, max_k: int) -> dict[int, np.ndarray]:
    """Path counts rooted at an endpoint for every length 1..max_k.

    counts[1] is the weight vector itself; each further length costs one
    adjacency multiply and one elementwise weight scaling.
    """
    if max_k < 1:
        raise CountingError(f"max path order must be >= 1, got {max_k}")
    w = g.channel(channel)
    plain = g.is_plain()
    if plain:
        a = _exact_adjacency(g)
        h = _ones_exact(g.n)
    else:
        a = g.adjacency
        h = w.copy()
    out = {1: h.copy()}
    for k in range(2, max_k + 1):
        h = a.dot(h) if plain else (a @ h) * w
        out[k] = h.copy()
    return out


def _children_postorder(pattern: RootedPattern):
    """(children lists, post-order vertex sequence) rooted at pattern.root.

    Children are visited in ascending vertex index; the traversal order does
    not change the result, fixing it keeps runs reproducible.
    """
    nbrs = pattern.neighbor_lists
    children: list[list[int]] = [[] for _ in range(pattern.order)]
    parent = [-1] * pattern.order
    post: list[int] = []
    stack: list[tuple[int, bool]] = [(pattern.root, False)]
    seen = {pattern.root}
    while stack:
        v, done = stack.pop()
        if done:
            post.append(v)
            continue
        stack.append((v, True))
        for u in reversed(nbrs[v]):
            if u not in seen:
                seen.add(u)
                parent[u] = v
                children[v].append(u)
                stack.append((u, False))
    for c in children:
        c.sort()
    return children, parent, post


def count_tree(g: FeaturedGraph, channel: int, pattern: RootedPattern) -> np.ndarray:
    """Rooted tree counts by post-order DP over the pattern.

    Accumulator H[t][v] ends up holding the weighted count of the subtree
    rooted at t landing on node v; each vertex starts at the weight vector
    (its own single-vertex subtree) and every finished child is folded in as
    H[parent] *= A @ H[child].  The root's accumulator is the answer.
    """
    if not pattern.is_tree():
        raise CountingError(f"pattern {pattern.name!r} is not a tree")
    w = g.channel(channel)
    plain = g.is_plain()
    if plain:
        a = _exact_adjacency(g)
        acc = {t: _ones_exact(g.n) for t in range(pattern.order)}
    else:
        a = g.adjacency
        acc = {t: w.copy() for t in range(pattern.order)}
    _, parent, post = _children_postorder(pattern)
    for t in post:
        if t == pattern.root:
            continue
        p = parent[t]
        acc[p] = acc[p] * (a.dot(acc[t]) if plain else a @ acc[t])
    return acc[pattern.root]


def count_rooted(
    g: FeaturedGraph, channel: int, pattern: RootedPattern, force: bool = False
) -> np.ndarray:
    """Dispatch a pattern to its fastest counting algorithm.

    Cycles and endpoint-rooted paths get their closed forms, other trees get
    the DP, anything else falls back to the brute-force oracle, refusing
    patterns above ORACLE_FALLBACK_MAX_ORDER vertices unless forced.
    """
    if pattern.is_cycle():
        return count_cycles(g, channel, [pattern.order])[pattern.order]
    if pattern.is_path_from_end():
        return count_paths(g, channel, pattern.order)[pattern.order]
    if pattern.is_tree():
        return count_tree(g, channel, pattern)
    if pattern.order > ORACLE_FALLBACK_MAX_ORDER and not force:
        raise oracle.SizeGuardError(
            f"pattern {pattern.name!r} (order {pattern.order}) is not a tree, path "
            f"or cycle; brute force beyond order {ORACLE_FALLBACK_MAX_ORDER} "
            "requires force=True"
        )
    return oracle.brute_force_all(g, channel, pattern, force=force)


def count_graph_level(
    g: FeaturedGraph, channel: int, pattern: RootedPattern, force: bool = False
):
    """Root-summed count: total weighted homomorphisms from the pattern.

    Independent of the choice of root for the families in scope.  Returns an
    exact int on plain graphs, float otherwise.
    """
    total = count_rooted(g, channel, pattern, force=force).sum()
    if g.is_plain():
        return int(total)
    return float(total)
