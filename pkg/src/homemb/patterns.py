"""Deterministic enumeration of rooted pattern families.

Four built-in families (trees, full binary trees, cycles, paths) plus a
custom file format.  Every pattern carries a canonical, human-readable name
that later becomes an embedding column header, so enumeration order and
naming must be stable across runs and platforms.

Free trees are generated by enumerating canonical rooted level sequences
(Beyer-Hedetniemi successor rule) and deduplicating through centroid
rooting; binary trees are generated as canonical child-code pairs, which
reproduces the Wedderburn-Etherington counts once left/right order is
ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cache, cached_property
from pathlib import Path

from .graphs import FeaturedGraph

SOFT_TREE_ORDER_CAP = 12
ISO_CHECK_MAX_ORDER = 9


class PatternError(ValueError):
    """Invalid pattern or pattern-family construction."""


@dataclass(frozen=True)
class RootedPattern:
    """A connected plain pattern graph with a distinguished root node.

    Patterns are always plain (all node weights 1); only target graphs carry
    features.  ``name`` identifies the pattern up to rooted isomorphism
    within its family and doubles as the embedding column header.
    """

    name: str
    order: int
    edges: tuple[tuple[int, int], ...]
    root: int = 0

    def __post_init__(self):
        if self.order < 1:
            raise PatternError("pattern must have at least one node")
        if not (0 <= self.root < self.order):
            raise PatternError(f"root {self.root} out of range for order {self.order}")
        norm = tuple(sorted(tuple(sorted(e)) for e in self.edges))
        object.__setattr__(self, "edges", norm)
        seen = set()
        for u, v in norm:
            if u == v:
                raise PatternError(f"pattern {self.name!r} has a self-loop at {u}")
            if not (0 <= u < self.order and 0 <= v < self.order):
                raise PatternError(f"pattern {self.name!r} edge ({u},{v}) out of range")
            if (u, v) in seen:
                raise PatternError(f"pattern {self.name!r} has duplicate edge ({u},{v})")
            seen.add((u, v))
        if not _connected(self.order, norm):
            raise PatternError(f"pattern {self.name!r} is disconnected")

    @cached_property
    def neighbor_lists(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.order)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(b)) for b in nbrs)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.neighbor_lists)

    def is_tree(self) -> bool:
        return len(self.edges) == self.order - 1

    def is_cycle(self) -> bool:
        return self.order >= 3 and all(d == 2 for d in self.degrees)

    def is_path_from_end(self) -> bool:
        """True for a path pattern rooted at one of its two endpoints."""
        if self.order == 1:
            return True
        if not self.is_tree():
            return False
        degs = sorted(self.degrees)
        if degs != [1, 1] + [2] * (self.order - 2):
            return False
        return self.degrees[self.root] == 1

    def as_graph(self) -> FeaturedGraph:
        return FeaturedGraph(n=self.order, edges=self.edges, name=self.name)


@dataclass(frozen=True)
class PatternFamily:
    """Ordered, duplicate-free collection of rooted patterns."""

    patterns: tuple[RootedPattern, ...]
    kind: str
    max_order: int

    def __post_init__(self):
        names = [p.name for p in self.patterns]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise PatternError(f"duplicate pattern names in family: {dup}")

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.patterns)

    def orders(self) -> dict[int, int]:
        """Number of patterns per order."""
        out: dict[int, int] = {}
        for p in self.patterns:
            out[p.order] = out.get(p.order, 0) + 1
        return dict(sorted(out.items()))

    def describe(self) -> str:
        """Human-readable listing: one pattern per line with root and edges."""
        lines = [f"# family kind={self.kind} max_order={self.max_order} size={len(self)}"]
        for p in self.patterns:
            es = ",".join(f"{u}-{v}" for u, v in p.edges)
            lines.append(f"{p.name}\troot={p.root}\tedges={es or '(none)'}")
        return "\n".join(lines)


def _connected(order: int, edges) -> bool:
    if order == 1:
        return True
    nbrs: list[list[int]] = [[] for _ in range(order)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    seen = {0}
    stack = [0]
    while stack:
        for u in nbrs[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == order


# --- rooted tree machinery ------------------------------------------------
#
# A rooted tree is represented canonically by a nested tuple code: the code
# of a node is the tuple of its children's codes sorted in descending order.
# Tuple comparison makes the descending sort well defined, two rooted trees
# are isomorphic iff their codes are equal, and codes translate back and
# forth to level sequences (depth of each node in a preorder walk that
# follows the sorted child order).


def _levelseq_successor(seq: list[int]) -> list[int] | None:
    """Next canonical rooted level sequence in decreasing lex order.

    Root has depth 0.  Starts from the path [0,1,...,n-1] and ends at the
    star [0,1,1,...,1]; returns None when the star is reached.  Each rooted
    tree on n nodes appears exactly once along the way.
    """
    n = len(seq)
    p = max((i for i in range(n) if seq[i] >= 2), default=-1)
    if p < 0:
        return None
    q = max(i for i in range(p) if seq[i] == seq[p] - 1)
    out = seq[:p]
    block = seq[q:p]
    while len(out) < n:
        out.extend(block[: n - len(out)])
    return out


def _all_rooted_levelseqs(n: int):
    seq: list[int] | None = list(range(n))
    while seq is not None:
        yield seq
        seq = _levelseq_successor(seq)


def _levelseq_to_edges(seq: list[int]) -> tuple[tuple[int, int], ...]:
    parent_at_depth = {0: 0}
    edges = []
    for i in range(1, len(seq)):
        d = seq[i]
        edges.append((parent_at_depth[d - 1], i))
        parent_at_depth[d] = i
    return tuple(edges)


def _code_of(nbrs, root: int, parent: int = -1) -> tuple:
    children = sorted(
        (_code_of(nbrs, u, root) for u in nbrs[root] if u != parent), reverse=True
    )
    return tuple(children)


def _code_to_levelseq(code: tuple, depth: int = 0) -> list[int]:
    out = [depth]
    for child in code:
        out.extend(_code_to_levelseq(child, depth + 1))
    return out


def _code_to_edges(code: tuple) -> tuple[int, tuple[tuple[int, int], ...]]:
    """Materialize a code as (order, edges) with preorder node ids, root 0."""
    edges: list[tuple[int, int]] = []
    counter = [1]

    def grow(c: tuple, me: int):
        for child in c:
            cid = counter[0]
            counter[0] += 1
            edges.append((me, cid))
            grow(child, cid)

    grow(code, 0)
    return counter[0], tuple(edges)


def _centroids(nbrs) -> list[int]:
    """Centroid(s): nodes minimizing the largest component left by removal."""
    n = len(nbrs)
    if n == 1:
        return [0]
    size = [1] * n
    order = []
    parent = [-1] * n
    stack = [0]
    seen = [False] * n
    seen[0] = True
    while stack:
        v = stack.pop()
        order.append(v)
        for u in nbrs[v]:
            if not seen[u]:
                seen[u] = True
                parent[u] = v
                stack.append(u)
    for v in reversed(order):
        if parent[v] >= 0:
            size[parent[v]] += size[v]
    best, arg = n + 1, []
    for v in range(n):
        heaviest = max(
            [n - size[v]] + [size[u] for u in nbrs[v] if u != parent[v]], default=0
        )
        if heaviest < best:
            best, arg = heaviest, [v]
        elif heaviest == best:
            arg.append(v)
    return arg


def _neighbor_lists(order: int, edges):
    nbrs: list[list[int]] = [[] for _ in range(order)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    return nbrs


def _tree_pattern_from_code(code: tuple, tag: str) -> RootedPattern:
    order, edges = _code_to_edges(code)
    levelseq = _code_to_levelseq(code)
    name = f"{tag}{order}:" + "-".join(map(str, levelseq))
    return RootedPattern(name=name, order=order, edges=edges, root=0)


def enumerate_trees(max_order: int) -> PatternFamily:
    """One pattern per free-tree isomorphism class of order <= max_order.

    Each class is represented by the rooted tree obtained at its canonical
    centroid (the centroid whose rooted code is largest), so the chosen root
    respects every symmetry of the tree.  Patterns are sorted by order, then
    by descending canonical code, which matches the decreasing-lex level
    sequence order of the generator.
    """
    if max_order < 1:
        raise PatternError(f"max_order must be >= 1, got {max_order}")
    patterns: list[RootedPattern] = []
    for n in range(1, max_order + 1):
        codes: set[tuple] = set()
        for seq in _all_rooted_levelseqs(n):
            nbrs = _neighbor_lists(n, _levelseq_to_edges(seq))
            free_code = max(_code_of(nbrs, c) for c in _centroids(nbrs))
            codes.add(free_code)
        for code in sorted(codes, reverse=True):
            patterns.append(_tree_pattern_from_code(code, "tree"))
    return PatternFamily(tuple(patterns), kind="trees", max_order=max_order)


@cache
def _binary_codes(order: int) -> tuple[tuple, ...]:
    """Canonical codes of full binary trees with exactly `order` nodes."""
    if order == 1:
        return ((),)
    if order % 2 == 0 or order < 1:
        return ()
    out = set()
    for left_size in range(1, order - 1, 2):
        right_size = order - 1 - left_size
        for a in _binary_codes(left_size):
            for b in _binary_codes(right_size):
                pair = (a, b) if a >= b else (b, a)
                out.add(pair)
    return tuple(sorted(out, reverse=True))


def enumerate_binary_trees(max_order: int) -> PatternFamily:
    """Full binary trees (every internal node has exactly two children).

    Children are unordered, so mirror images are identified and the count at
    each odd order follows the Wedderburn-Etherington numbers.  Rooted at
    the tree's own root, not a centroid.  Even orders contribute nothing.
    """
    if max_order < 1:
        raise PatternError(f"max_order must be >= 1, got {max_order}")
    patterns = []
    for n in range(1, max_order + 1, 2):
        for code in _binary_codes(n):
            patterns.append(_tree_pattern_from_code(code, "btree"))
    return PatternFamily(tuple(patterns), kind="binary_trees", max_order=max_order)


def enumerate_cycles(max_order: int) -> PatternFamily:
    """Cycles C3 .. C_max_order, each rooted at node 0 (any root is equivalent)."""
    if max_order < 3:
        raise PatternError(f"cycle family needs max_order >= 3, got {max_order}")
    patterns = []
    for k in range(3, max_order + 1):
        edges = tuple((i, (i + 1) % k) for i in range(k))
        patterns.append(RootedPattern(name=f"C{k}", order=k, edges=edges, root=0))
    return PatternFamily(tuple(patterns), kind="cycles", max_order=max_order)


def enumerate_paths(max_order: int) -> PatternFamily:
    """Paths P1 .. P_max_order rooted at an endpoint; P1 is the singleton."""
    if max_order < 1:
        raise PatternError(f"path family needs max_order >= 1, got {max_order}")
    patterns = []
    for k in range(1, max_order + 1):
        edges = tuple((i, i + 1) for i in range(k - 1))
        patterns.append(RootedPattern(name=f"P{k}", order=k, edges=edges, root=0))
    return PatternFamily(tuple(patterns), kind="paths", max_order=max_order)


FAMILY_BUILDERS = {
    "trees": enumerate_trees,
    "binary_trees": enumerate_binary_trees,
    "cycles": enumerate_cycles,
    "paths": enumerate_paths,
}

DEFAULT_MAX_ORDERS = {"trees": 12, "binary_trees": 12, "cycles": 10, "paths": 10}


def build_family(kind: str, max_order: int | None = None) -> PatternFamily:
    """Dispatch on family kind; max_order defaults to the kind's usual cap."""
    if kind not in FAMILY_BUILDERS:
        raise PatternError(
            f"unknown family kind {kind!r}, expected one of {sorted(FAMILY_BUILDERS)}"
        )
    if max_order is None:
        max_order = DEFAULT_MAX_ORDERS[kind]
    return FAMILY_BUILDERS[kind](max_order)


def rooted_isomorphic(a: RootedPattern, b: RootedPattern) -> bool:
    """Exact rooted-isomorphism test by backtracking, for small patterns.

    Guarded at order ISO_CHECK_MAX_ORDER; beyond that the search space is
    too large for a duplicate check and callers must rely on names.
    """
    if a.order != b.order or len(a.edges) != len(b.edges):
        return False
    if sorted(a.degrees) != sorted(b.degrees):
        return False
    if a.degrees[a.root] != b.degrees[b.root]:
        return False
    if a.is_tree() and b.is_tree():
        na, nb = a.neighbor_lists, b.neighbor_lists
        return _code_of(na, a.root) == _code_of(nb, b.root)
    if a.order > ISO_CHECK_MAX_ORDER:
        raise PatternError(
            f"rooted isomorphism check limited to order {ISO_CHECK_MAX_ORDER}"
        )
    an, bn = a.neighbor_lists, b.neighbor_lists
    aset = {frozenset(e) for e in a.edges}
    bset = {frozenset(e) for e in b.edges}
    mapping = {a.root: b.root}
    used = {b.root}

    def extend(order_a: list[int]) -> bool:
        if not order_a:
            return True
        x = order_a[0]
        for y in range(b.order):
            if y in used or a.degrees[x] != b.degrees[y]:
                continue
            ok = True
            for u in an[x]:
                if u in mapping and frozenset((y, mapping[u])) not in bset:
                    ok = False
                    break
            if ok:
                # also require non-edges to stay non-edges among mapped nodes
                for u in mapping:
                    fa = frozenset((x, u))
                    if len(fa) == 2 and (fa in aset) != (frozenset((y, mapping[u])) in bset):
                        ok = False
                        break
            if ok:
                mapping[x] = y
                used.add(y)
                if extend(order_a[1:]):
                    return True
                del mapping[x]
                used.discard(y)
        return False

    rest = [v for v in _bfs_order(an, a.root) if v != a.root]
    return extend(rest)


def _bfs_order(nbrs, root: int) -> list[int]:
    seen = {root}
    out = [root]
    i = 0
    while i < len(out):
        for u in nbrs[out[i]]:
            if u not in seen:
                seen.add(u)
                out.append(u)
        i += 1
    return out


def pattern_from_name(name: str) -> RootedPattern:
    """Rebuild a built-in pattern from its canonical name.

    Accepts C<k>, P<k>, and tree<k>/btree<k> names whose encoded level
    sequence fully determines the rooted structure.
    """
    if m := re.fullmatch(r"C(\d+)", name):
        k = int(m.group(1))
        if k < 3:
            raise PatternError(f"{name!r}: cycles start at C3")
        return RootedPattern(name, k, tuple((i, (i + 1) % k) for i in range(k)), 0)
    if m := re.fullmatch(r"P(\d+)", name):
        k = int(m.group(1))
        if k < 1:
            raise PatternError(f"{name!r}: paths start at P1")
        return RootedPattern(name, k, tuple((i, i + 1) for i in range(k - 1)), 0)
    if m := re.fullmatch(r"(tree|btree)(\d+):([0-9-]+)", name):
        order = int(m.group(2))
        try:
            seq = [int(x) for x in m.group(3).split("-")]
        except ValueError:
            raise PatternError(f"{name!r}: bad level sequence") from None
        if len(seq) != order or not seq or seq[0] != 0:
            raise PatternError(f"{name!r}: level sequence does not match order")
        for prev, d in zip(seq, seq[1:]):
            if d < 1 or d > prev + 1:
                raise PatternError(f"{name!r}: invalid level sequence step")
        return RootedPattern(name, order, _levelseq_to_edges(seq), 0)
    raise PatternError(f"cannot reconstruct a pattern from name {name!r}")


def parse_custom_family(path) -> PatternFamily:
    """Read a user pattern family from a block-format text file.

    Each block starts with a ``name <str>`` line, followed by ``root <i>``
    and ``edges u-v,u-v,...`` lines; ``#`` comments and blank lines are
    ignored.  A block with an empty edge list is the rooted singleton.  The
    node count is inferred from the largest mentioned node index.  Entries
    that are rooted-isomorphic to an earlier entry are rejected (exact check
    up to order 9; larger patterns are only checked by name).
    """
    text = Path(path).read_text()
    blocks: list[dict] = []
    cur: dict | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "name":
            if not rest:
                raise PatternError(f"{path}:{lineno}: empty pattern name")
            cur = {"name": rest, "root": 0, "edges": []}
            blocks.append(cur)
        elif cur is None:
            raise PatternError(f"{path}:{lineno}: {key!r} before any 'name' line")
        elif key == "root":
            try:
                cur["root"] = int(rest)
            except ValueError:
                raise PatternError(f"{path}:{lineno}: bad root {rest!r}") from None
        elif key == "edges":
            if rest:
                for item in rest.split(","):
                    u, _, v = item.strip().partition("-")
                    try:
                        cur["edges"].append((int(u), int(v)))
                    except ValueError:
                        raise PatternError(
                            f"{path}:{lineno}: bad edge {item.strip()!r}"
                        ) from None
        else:
            raise PatternError(f"{path}:{lineno}: unknown directive {key!r}")
    if not blocks:
        raise PatternError(f"{path}: no patterns defined")
    patterns = []
    for b in blocks:
        touched = [b["root"]] + [x for e in b["edges"] for x in e]
        order = max(touched) + 1
        patterns.append(
            RootedPattern(name=b["name"], order=order, edges=tuple(b["edges"]), root=b["root"])
        )
    for i in range(len(patterns)):
        for j in range(i + 1, len(patterns)):
            a, b2 = patterns[i], patterns[j]
            if a.order == b2.order and a.order <= ISO_CHECK_MAX_ORDER:
                if rooted_isomorphic(a, b2):
                    raise PatternError(
                        f"{path}: patterns {a.name!r} and {b2.name!r} are rooted-isomorphic"
                    )
    max_order = max(p.order for p in patterns)
    return PatternFamily(tuple(patterns), kind="custom", max_order=max_order)
