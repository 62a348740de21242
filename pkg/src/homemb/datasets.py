"""Synthetic SBM benchmarks and dataset persistence.

Reproducibility contract: generation uses splitmix64, a fixed, portable
64-bit generator, so any implementation of this format in any language can
regenerate identical datasets from the same seed.  Constants and draw order:

    state += 0x9E3779B97F4A7C15                     (per draw, mod 2^64)
    z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
    z = (z ^ z>>27) * 0x94D049BB133111EB; out = z ^ z>>31
    float in [0,1): (out >> 11) * 2^-53
    int in [0,r):   out % r

Graph i draws from an independent substream seeded with (seed XOR i).  Per
graph the draw order is: node count, then one float per unordered node pair
(u ascending, v ascending within u), then the feature draws in node order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graphs import (
    FeaturedGraph,
    load_graph_file,
    load_or_build,
    read_labels,
    write_edge_list,
    write_feature_csv,
    write_labels,
)

_MASK64 = (1 << 64) - 1


class DatasetError(ValueError):
    """Invalid generation spec or dataset directory contents."""


class SplitMix64:
    """The splitmix64 sequence; small, fast, and easy to port."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def below(self, r: int) -> int:
        if r < 1:
            raise DatasetError(f"empty draw range {r}")
        return self.next_u64() % r


@dataclass(frozen=True)
class SbmSpec:
    """Stochastic block model parameters for one synthetic dataset.

    For cluster-like data num_communities is the class count; for
    pattern-like data it counts the background communities and one extra
    pattern block (present iff pattern_p/pattern_q are set) is appended.
    """

    num_graphs: int
    nodes_lo: int
    nodes_hi: int
    num_communities: int
    p_intra: float
    q_inter: float
    seed: int
    pattern_p: float | None = None
    pattern_q: float | None = None

    def __post_init__(self):
        if self.num_graphs < 1:
            raise DatasetError("need at least one graph")
        if not (1 <= self.nodes_lo <= self.nodes_hi):
            raise DatasetError(f"bad node range [{self.nodes_lo}, {self.nodes_hi}]")
        if self.num_communities < 1:
            raise DatasetError("need at least one community")
        if not (0.0 <= self.q_inter <= self.p_intra <= 1.0):
            raise DatasetError(
                f"need 0 <= q <= p <= 1, got q={self.q_inter} p={self.p_intra}"
            )
        if (self.pattern_p is None) != (self.pattern_q is None):
            raise DatasetError("pattern_p and pattern_q must be set together")
        if self.pattern_p is not None:
            if not (0.0 <= self.pattern_q <= self.pattern_p <= 1.0):
                raise DatasetError(
                    f"need 0 <= pattern_q <= pattern_p <= 1, got "
                    f"q={self.pattern_q} p={self.pattern_p}"
                )

    def has_pattern_block(self) -> bool:
        return self.pattern_p is not None

    def to_json(self) -> dict:
        out = {
            "num_graphs": self.num_graphs,
            "nodes_lo": self.nodes_lo,
            "nodes_hi": self.nodes_hi,
            "num_communities": self.num_communities,
            "p_intra": self.p_intra,
            "q_inter": self.q_inter,
            "seed": self.seed,
        }
        if self.has_pattern_block():
            out["pattern_p"] = self.pattern_p
            out["pattern_q"] = self.pattern_q
        return out


DESK_CLUSTER_SPEC = SbmSpec(
    num_graphs=200, nodes_lo=40, nodes_hi=60, num_communities=6,
    p_intra=0.55, q_inter=0.25, seed=7,
)
DESK_PATTERN_SPEC = SbmSpec(
    num_graphs=200, nodes_lo=44, nodes_hi=60, num_communities=5,
    p_intra=0.5, q_inter=0.35, pattern_p=0.5, pattern_q=0.5, seed=7,
)


@dataclass(frozen=True)
class LabeledDataset:
    """Graphs with per-node class labels."""

    graphs: tuple[FeaturedGraph, ...]
    labels: tuple[np.ndarray, ...]
    num_classes: int
    name: str

    def __post_init__(self):
        if len(self.graphs) != len(self.labels):
            raise DatasetError(
                f"{len(self.graphs)} graphs but {len(self.labels)} label vectors"
            )
        frozen = []
        for g, y in zip(self.graphs, self.labels):
            y = np.asarray(y, dtype=np.int64)
            if y.shape != (g.n,):
                raise DatasetError(
                    f"graph {g.name!r} has {g.n} nodes but {y.shape} labels"
                )
            if y.size and (y.min() < 0 or y.max() >= self.num_classes):
                raise DatasetError(
                    f"graph {g.name!r} labels outside [0, {self.num_classes})"
                )
            y = y.copy()
            y.setflags(write=False)
            frozen.append(y)
        object.__setattr__(self, "labels", tuple(frozen))
        object.__setattr__(self, "graphs", tuple(self.graphs))

    def total_nodes(self) -> int:
        return sum(g.n for g in self.graphs)

    def pooled_labels(self) -> np.ndarray:
        return np.concatenate(self.labels) if self.labels else np.empty(0, np.int64)


def _block_sizes(n: int, blocks: int) -> list[int]:
    base, rem = divmod(n, blocks)
    return [base + (1 if j < rem else 0) for j in range(blocks)]


def _block_offsets(sizes: list[int]) -> list[int]:
    offsets = [0]
    for s in sizes[:-1]:
        offsets.append(offsets[-1] + s)
    return offsets


def _draw_edges(rng: SplitMix64, block_of: list[int], prob) -> list[tuple[int, int]]:
    n = len(block_of)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < prob(block_of[u], block_of[v]):
                edges.append((u, v))
    return edges


def gen_cluster_like(spec: SbmSpec) -> LabeledDataset:
    """Community-recovery benchmark: c equal-ish SBM blocks per graph.

    Node features are a single channel that is zero everywhere except one
    uniformly chosen node per community, which is assigned the value
    (community index + 1); labels are the community ids.  The structural
    distribution is identical across communities, so the labeled nodes carry
    the only class-revealing information.
    """
    if spec.has_pattern_block():
        raise DatasetError("cluster-like generation takes no pattern block")
    c = spec.num_communities
    graphs, labels = [], []
    for i in range(spec.num_graphs):
        rng = SplitMix64(spec.seed ^ i)
        n = spec.nodes_lo + rng.below(spec.nodes_hi - spec.nodes_lo + 1)
        if n < c:
            raise DatasetError(f"graph {i}: {n} nodes cannot host {c} communities")
        sizes = _block_sizes(n, c)
        offsets = _block_offsets(sizes)
        block_of = [j for j, s in enumerate(sizes) for _ in range(s)]
        edges = _draw_edges(
            rng, block_of,
            lambda a, b: spec.p_intra if a == b else spec.q_inter,
        )
        feats = np.zeros((n, 1))
        for j in range(c):
            feats[offsets[j] + rng.below(sizes[j]), 0] = float(j + 1)
        graphs.append(load_or_build(n, edges, feats, name=f"cluster_{i}"))
        labels.append(np.array(block_of, dtype=np.int64))
    return LabeledDataset(tuple(graphs), tuple(labels), num_classes=c, name="cluster")


def gen_pattern_like(spec: SbmSpec) -> LabeledDataset:
    """Pattern-detection benchmark: background SBM plus one denser block.

    Background blocks use (p_intra, q_inter); the appended pattern block uses
    its own densities for edges within itself and toward the rest.  Labels
    are binary (1 on pattern nodes); features are uniform noise from
    {1, 2, 3}, carrying no class information at all.
    """
    if not spec.has_pattern_block():
        raise DatasetError("pattern-like generation requires pattern_p/pattern_q")
    blocks = spec.num_communities + 1
    pattern_block = blocks - 1
    graphs, labels = [], []
    for i in range(spec.num_graphs):
        rng = SplitMix64(spec.seed ^ i)
        n = spec.nodes_lo + rng.below(spec.nodes_hi - spec.nodes_lo + 1)
        if n < blocks:
            raise DatasetError(f"graph {i}: {n} nodes cannot host {blocks} blocks")
        sizes = _block_sizes(n, blocks)
        block_of = [j for j, s in enumerate(sizes) for _ in range(s)]

        def prob(a, b):
            if a == b:
                return spec.pattern_p if a == pattern_block else spec.p_intra
            if pattern_block in (a, b):
                return spec.pattern_q
            return spec.q_inter

        edges = _draw_edges(rng, block_of, prob)
        feats = np.array(
            [[float(1 + rng.below(3))] for _ in range(n)], dtype=np.float64
        )
        graphs.append(load_or_build(n, edges, feats, name=f"pattern_{i}"))
        labels.append(
            np.array([1 if b == pattern_block else 0 for b in block_of], dtype=np.int64)
        )
    return LabeledDataset(tuple(graphs), tuple(labels), num_classes=2, name="pattern")


# --- persistence ----------------------------------------------------------
#
# Directory layout: meta.json plus graph_<i>.edges, graph_<i>.features.csv,
# graph_<i>.labels for i in 0..num_graphs-1.


def save_dataset(ds: LabeledDataset, directory, spec: SbmSpec | None = None) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    meta = {
        "name": ds.name,
        "num_classes": ds.num_classes,
        "num_graphs": len(ds.graphs),
    }
    if spec is not None:
        meta["spec"] = spec.to_json()
    (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    for i, (g, y) in enumerate(zip(ds.graphs, ds.labels)):
        write_edge_list(g, d / f"graph_{i}.edges")
        write_feature_csv(g.features, d / f"graph_{i}.features.csv")
        write_labels(y, d / f"graph_{i}.labels")


def load_dataset(directory) -> LabeledDataset:
    d = Path(directory)
    meta_path = d / "meta.json"
    if not meta_path.exists():
        raise DatasetError(f"{d}: missing meta.json")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{meta_path}: invalid JSON ({exc})") from None
    for key in ("name", "num_classes", "num_graphs"):
        if key not in meta:
            raise DatasetError(f"{meta_path}: missing key {key!r}")
    count = int(meta["num_graphs"])
    found = {
        int(m.group(1))
        for f in d.glob("graph_*.edges")
        if (m := re.fullmatch(r"graph_(\d+)\.edges", f.name))
    }
    if found != set(range(count)):
        raise DatasetError(
            f"{d}: meta declares {count} graphs but found indices {sorted(found)}"
        )
    graphs, labels = [], []
    for i in range(count):
        edge_path = d / f"graph_{i}.edges"
        feat_path = d / f"graph_{i}.features.csv"
        label_path = d / f"graph_{i}.labels"
        if not label_path.exists():
            raise DatasetError(f"{d}: missing {label_path.name}")
        g = load_graph_file(
            edge_path, feat_path if feat_path.exists() else None, name=f"graph_{i}"
        )
        y = read_labels(label_path)
        if y.shape[0] != g.n:
            raise DatasetError(
                f"{d}: graph_{i} has {g.n} nodes but {y.shape[0]} labels"
            )
        graphs.append(g)
        labels.append(y)
    return LabeledDataset(
        tuple(graphs), tuple(labels), num_classes=int(meta["num_classes"]),
        name=str(meta["name"]),
    )
