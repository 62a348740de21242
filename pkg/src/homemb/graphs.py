"""Featured graphs: construction, validation, preprocessing, color refinement.

Right-hand graphs are simple and undirected over nodes ``0..n-1``.  Every node
carries ``m >= 1`` real feature channels; a plain graph is the ``m = 1``
all-ones case.  Channel values act as multiplicative node weights during
counting, so zero entries must be disturbed with
:func:`preprocess_zero_features` before any weighted count is taken.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

import numpy as np

DEFAULT_EPSILON = 0.01


class GraphError(ValueError):
    """Invalid graph construction or graph file contents."""


@dataclass(frozen=True, eq=False)
class FeaturedGraph:
    """Immutable simple undirected graph with an n x m node-feature matrix."""

    n: int
    edges: tuple[tuple[int, int], ...]
    features: np.ndarray
    name: str = "graph"

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("graph must have at least one node")
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] != self.n or feats.shape[1] < 1:
            raise GraphError(
                f"feature matrix must be {self.n} x m with m >= 1, got shape {feats.shape}"
            )
        if not np.all(np.isfinite(feats)):
            raise GraphError("feature matrix contains non-finite values")
        feats = feats.copy()
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "edges", tuple(sorted(tuple(sorted(e)) for e in self.edges)))
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) out of range for {self.n} nodes")
        if len(set(self.edges)) != len(self.edges):
            raise GraphError("duplicate edges")

    @property
    def m(self) -> int:
        return self.features.shape[1]

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.float64)
        for u, v in self.edges:
            a[u, v] = 1.0
            a[v, u] = 1.0
        a.setflags(write=False)
        return a

    @cached_property
    def neighbor_lists(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(b)) for b in nbrs)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.array([len(b) for b in self.neighbor_lists], dtype=np.int64)
        d.setflags(write=False)
        return d

    def channel(self, i: int) -> np.ndarray:
        """One feature column as a weight vector (read-only view)."""
        if not (0 <= i < self.m):
            raise GraphError(f"channel {i} out of range, graph has {self.m} channels")
        return self.features[:, i]

    def is_plain(self) -> bool:
        return self.m == 1 and bool(np.all(self.features == 1.0))

    def as_plain(self) -> FeaturedGraph:
        """Same structure with the default all-ones single feature channel."""
        if self.is_plain():
            return self
        return replace(self, features=np.ones((self.n, 1)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeaturedGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.edges == other.edges
            and self.features.shape == other.features.shape
            and bool(np.all(self.features == other.features))
            and self.name == other.name
        )

    def __repr__(self) -> str:
        return f"FeaturedGraph(name={self.name!r}, n={self.n}, edges={len(self.edges)}, m={self.m})"


def load_or_build(nodes, edge_list, feature_matrix=None, name="graph") -> FeaturedGraph:
    """Validate raw inputs and build a FeaturedGraph.

    Missing features default to the all-ones column.  Rejects out-of-range
    endpoints, self-loops, duplicate edges, and ragged feature rows.
    """
    n = int(nodes)
    if n < 1:
        raise GraphError("graph must have at least one node")
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    for e in edge_list:
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise GraphError(f"self-loop at node {u} rejected")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) has endpoint out of range [0, {n})")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge ({key[0]}, {key[1]}) rejected")
        seen.add(key)
        edges.append(key)
    if feature_matrix is None:
        feats = np.ones((n, 1))
    else:
        rows = [list(map(float, row)) for row in feature_matrix]
        if len(rows) != n:
            raise GraphError(f"feature matrix has {len(rows)} rows, expected {n}")
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise GraphError("ragged feature rows")
        feats = np.array(rows, dtype=np.float64)
        if feats.size == 0:
            raise GraphError("feature matrix must have at least one column")
    return FeaturedGraph(n=n, edges=tuple(edges), features=feats, name=name)


def preprocess_zero_features(g: FeaturedGraph, epsilon: float = DEFAULT_EPSILON) -> FeaturedGraph:
    """Replace every feature entry equal to 0 by ``epsilon``.

    Weighted counts multiply feature values along a homomorphism image, so a
    single zero wipes out every mapping through that node.  Idempotent for a
    fixed epsilon.  Negative features stay as they are; they are legal but can
    make products vanish by cancellation.
    """
    if not epsilon > 0:
        raise GraphError(f"epsilon must be positive, got {epsilon}")
    feats = np.array(g.features)
    feats[feats == 0.0] = epsilon
    return replace(g, features=feats)


def permute(g: FeaturedGraph, perm) -> FeaturedGraph:
    """Relabel nodes so old node v becomes perm[v]; features carried along."""
    p = [int(x) for x in perm]
    if sorted(p) != list(range(g.n)):
        raise GraphError(f"perm is not a bijection on [0, {g.n})")
    edges = tuple((p[u], p[v]) for u, v in g.edges)
    feats = np.empty_like(np.asarray(g.features))
    for v in range(g.n):
        feats[p[v]] = g.features[v]
    return FeaturedGraph(n=g.n, edges=edges, features=feats, name=g.name)


@dataclass(frozen=True)
class RootedGraph:
    """A featured graph with a distinguished node."""

    graph: FeaturedGraph
    root: int

    def __post_init__(self):
        if not (0 <= self.root < self.graph.n):
            raise GraphError(f"root {self.root} out of range for {self.graph.n} nodes")


@dataclass(frozen=True)
class WlColoring:
    """Stable 1-dimensional color refinement of a graph's nodes.

    Color ids are canonicalized to first-occurrence order over node indices,
    so equal graphs always produce identical arrays.  Two nodes share a color
    iff their neighbor-color multisets agreed at every refinement round.
    """

    colors: np.ndarray
    num_colors: int
    rounds: int

    def classes(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for v, c in enumerate(self.colors):
            out.setdefault(int(c), []).append(v)
        return {c: tuple(vs) for c, vs in out.items()}


def wl_refine(g: FeaturedGraph) -> WlColoring:
    """Run structure-only color refinement to its fixpoint.

    The initial coloring is uniform (features are ignored) and each round
    refines by the multiset of neighbor colors.  Refinement only ever splits
    classes, so the fixpoint is reached in at most n rounds.
    """
    nbrs = g.neighbor_lists
    colors = [0] * g.n
    rounds = 0
    for _ in range(g.n):
        sig_ids: dict[tuple, int] = {}
        new = [0] * g.n
        for v in range(g.n):
            sig = (colors[v], tuple(sorted(colors[u] for u in nbrs[v])))
            if sig not in sig_ids:
                sig_ids[sig] = len(sig_ids)
            new[v] = sig_ids[sig]
        if new == colors:
            break
        colors = new
        rounds += 1
    arr = np.array(colors, dtype=np.int64)
    arr.setflags(write=False)
    return WlColoring(colors=arr, num_colors=len(set(colors)), rounds=rounds)


# --- file formats ---------------------------------------------------------
#
# Edge-list file: UTF-8 text, one "u v" pair per line (0-indexed, whitespace
# separated), '#' comment lines ignored.  Writers emit a "# nodes N" comment
# so isolated nodes survive a round trip.
# Feature file: CSV, n rows, m numeric columns, optional header row.
# Label file: one integer class per line.


def read_edge_list(path) -> tuple[list[tuple[int, int]], int | None]:
    """Parse an edge-list file; returns (edges, node-count hint or None)."""
    edges: list[tuple[int, int]] = []
    n_hint = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "nodes" and parts[1].isdigit():
                n_hint = int(parts[1])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"{path}:{lineno}: expected 'u v', got {line!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphError(f"{path}:{lineno}: non-integer endpoint in {line!r}") from None
    return edges, n_hint


def write_edge_list(g: FeaturedGraph, path) -> None:
    lines = [f"# nodes {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    Path(path).write_text("\n".join(lines) + "\n")


def read_feature_csv(path) -> np.ndarray:
    """Read an n x m numeric CSV; a non-numeric first row is taken as header."""
    rows = []
    text = Path(path).read_text().splitlines()
    for lineno, raw in enumerate(text, start=1):
        line = raw.strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            if lineno == 1 or not rows:
                continue  # header row
            raise GraphError(f"{path}:{lineno}: non-numeric feature cell") from None
    if not rows:
        raise GraphError(f"{path}: no feature rows")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise GraphError(f"{path}: ragged feature rows")
    return np.array(rows, dtype=np.float64)


def write_feature_csv(features: np.ndarray, path, header: bool = True) -> None:
    feats = np.asarray(features, dtype=np.float64)
    lines = []
    if header:
        lines.append(",".join(f"f{j}" for j in range(feats.shape[1])))
    for row in feats:
        lines.append(",".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_labels(path) -> np.ndarray:
    labels = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            labels.append(int(line))
        except ValueError:
            raise GraphError(f"{path}:{lineno}: non-integer label {line!r}") from None
    if not labels:
        raise GraphError(f"{path}: no labels")
    return np.array(labels, dtype=np.int64)


def write_labels(labels, path) -> None:
    Path(path).write_text("\n".join(str(int(x)) for x in labels) + "\n")


def load_graph_file(edge_path, features_path=None, name=None) -> FeaturedGraph:
    """Build a graph from an edge-list file plus an optional feature CSV.

    Node count comes from the feature matrix when given, else from the file's
    "# nodes" comment, else from the largest endpoint.
    """
    edges, n_hint = read_edge_list(edge_path)
    feats = read_feature_csv(features_path) if features_path is not None else None
    if feats is not None:
        n = feats.shape[0]
    elif n_hint is not None:
        n = n_hint
    elif edges:
        n = max(max(u, v) for u, v in edges) + 1
    else:
        raise GraphError(f"{edge_path}: empty edge list and no node count")
    return load_or_build(n, edges, feats, name=name or Path(edge_path).stem)
