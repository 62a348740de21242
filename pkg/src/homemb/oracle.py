"""Brute-force weighted homomorphism counting, the ground truth for tests.

Enumerates every root-pinned map from pattern to graph by backtracking and
sums the product of target-node weights over the edge-preserving ones.  No
shared machinery with the fast counting paths, so agreement between the two
is meaningful evidence.  Exponential in pattern order; a size guard refuses
hopeless inputs.
"""

from __future__ import annotations

import numpy as np

from .graphs import FeaturedGraph
from .patterns import RootedPattern, _bfs_order

MAX_MAPPINGS = 10**8


class SizeGuardError(RuntimeError):
    """Enumeration would exceed the mapping budget; pass force=True to insist."""


def _check_budget(g: FeaturedGraph, pattern: RootedPattern, force: bool):
    mappings = g.n ** max(pattern.order - 1, 0)
    if mappings > MAX_MAPPINGS and not force:
        raise SizeGuardError(
            f"{g.n}^{pattern.order - 1} = {mappings} candidate maps exceeds the "
            f"{MAX_MAPPINGS} budget for pattern {pattern.name!r}"
        )


def brute_force_rooted(
    g: FeaturedGraph, channel: int, pattern: RootedPattern, v: int, force: bool = False
):
    """Weighted count of pattern homomorphisms that send the root to node v.

    Backtracks over pattern vertices in BFS order from the root, so every
    vertex placed after the first has at least one already-placed neighbor;
    candidates are drawn from the intersection of the images' neighborhoods.
    Plain graphs are counted in exact integer arithmetic (returns int),
    weighted graphs in floats.
    """
    _check_budget(g, pattern, force)
    if not (0 <= v < g.n):
        raise ValueError(f"target node {v} out of range")
    plain = g.is_plain()
    w = g.channel(channel)
    nbrs_g = g.neighbor_lists
    nbrs_p = pattern.neighbor_lists
    order = _bfs_order(nbrs_p, pattern.root)
    pos = {x: i for i, x in enumerate(order)}
    # pattern neighbors already placed when x comes up in the backtracking
    placed_nbrs = [[u for u in nbrs_p[x] if pos[u] < pos[x]] for x in order]

    image = [0] * pattern.order
    image[pattern.root] = v
    total_int = 0
    total_float = 0.0

    def recurse(i: int, weight_so_far: float):
        nonlocal total_int, total_float
        if i == len(order):
            if plain:
                total_int += 1
            else:
                total_float += weight_so_far
            return
        x = order[i]
        anchors = placed_nbrs[i]
        candidates = nbrs_g[image[anchors[0]]]
        for target in candidates:
            ok = True
            for u in anchors[1:]:
                if target not in nbrs_g[image[u]]:
                    ok = False
                    break
            if ok:
                image[x] = target
                recurse(i + 1, weight_so_far * w[target])

    recurse(1, float(w[v]))
    if plain:
        return total_int
    return total_float


def brute_force_all(
    g: FeaturedGraph, channel: int, pattern: RootedPattern, force: bool = False
) -> np.ndarray:
    """brute_force_rooted for every target node.

    Returns an object-dtype array of exact ints on plain graphs, float64
    otherwise.
    """
    _check_budget(g, pattern, force)
    vals = [brute_force_rooted(g, channel, pattern, v, force=force) for v in range(g.n)]
    if g.is_plain():
        out = np.empty(g.n, dtype=object)
        out[:] = vals
        return out
    return np.array(vals, dtype=np.float64)
