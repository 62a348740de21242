"""Node embedding assembly, transforms, and file formats.

An embedding matrix is |V| x D with one column per (pattern, channel) pair.
Column labels form a small grammar that records exactly how each column was
computed, so any column can be recomputed from its label alone:

    label     := transform* base
    transform := "log:" | "density:"
    base      := "rawfeat:" j | pattern_name ":ch" i

Transforms read outermost first: ``log:density:C3:ch0`` is the signed log of
the density of the C3 count on channel 0.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .counting import count_cycles, count_paths, count_rooted
from .graphs import FeaturedGraph
from .patterns import PatternFamily, RootedPattern

BINARY_MAGIC = b"HOMEMB1"


class EmbeddingError(ValueError):
    """Invalid embedding construction, combination, or file contents."""


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Immutable |V| x D embedding with per-column provenance labels."""

    values: np.ndarray
    column_labels: tuple[str, ...]
    source: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise EmbeddingError(f"values must be 2-d, got shape {vals.shape}")
        if vals.shape[1] != len(self.column_labels):
            raise EmbeddingError(
                f"{vals.shape[1]} columns but {len(self.column_labels)} labels"
            )
        if len(set(self.column_labels)) != len(self.column_labels):
            raise EmbeddingError("duplicate column labels")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "column_labels", tuple(self.column_labels))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def column(self, label: str) -> np.ndarray:
        try:
            j = self.column_labels.index(label)
        except ValueError:
            raise EmbeddingError(f"no column labeled {label!r}") from None
        return self.values[:, j]


def _family_counts(
    g: FeaturedGraph, channel: int, family: PatternFamily, threads: int = 1
) -> list[np.ndarray]:
    """One count vector per family pattern, in family order.

    Cycle and endpoint-rooted path patterns are batched into a single
    iterated-multiplication pass per kind; remaining patterns are counted
    individually (possibly across a thread pool).  Results are assembled in
    family order, so scheduling cannot affect the output.
    """
    cycle_ks = [p.order for p in family if p.is_cycle()]
    path_ks = [p.order for p in family if p.is_path_from_end()]
    jobs: list = []  # callables producing {key: vector}
    if cycle_ks:
        jobs.append(lambda: {("C", k): v for k, v in count_cycles(g, channel, cycle_ks).items()})
    if path_ks:
        jobs.append(
            lambda: {
                ("P", k): v
                for k, v in count_paths(g, channel, max(path_ks)).items()
                if k in set(path_ks)
            }
        )
    for p in family:
        if not (p.is_cycle() or p.is_path_from_end()):
            jobs.append(lambda p=p: {("X", p.name): count_rooted(g, channel, p)})
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda j: j(), jobs))
    else:
        results = [j() for j in jobs]
    table: dict = {}
    for r in results:
        table.update(r)
    out = []
    for p in family:
        if p.is_cycle():
            out.append(table[("C", p.order)])
        elif p.is_path_from_end():
            out.append(table[("P", p.order)])
        else:
            out.append(table[("X", p.name)])
    return out


def _as_float_column(vec: np.ndarray) -> np.ndarray:
    if vec.dtype == object:
        return np.array([float(x) for x in vec], dtype=np.float64)
    return np.asarray(vec, dtype=np.float64)


def embed_plain(
    g: FeaturedGraph, family: PatternFamily, threads: int = 1
) -> EmbeddingMatrix:
    """Structural embedding: one column per pattern, counts on channel 0.

    On a plain graph this is the pure homomorphism-count embedding; on a
    featured graph the first channel acts as node weights.  The caller is
    responsible for preprocessing zero features first.
    """
    if len(family) == 0:
        raise EmbeddingError("empty pattern family")
    cols = _family_counts(g, 0, family, threads=threads)
    values = np.column_stack([_as_float_column(c) for c in cols])
    labels = tuple(f"{p.name}:ch0" for p in family)
    return EmbeddingMatrix(values, labels, source=f"{g.name}|{family.kind}")


def _single_channel(g: FeaturedGraph, i: int) -> FeaturedGraph:
    return FeaturedGraph(
        n=g.n, edges=g.edges, features=g.features[:, i : i + 1], name=g.name
    )


def embed_tensor(
    g: FeaturedGraph, family: PatternFamily, threads: int = 1
) -> EmbeddingMatrix:
    """Tensor embedding: the plain embedding of every feature channel, stacked.

    Column block i equals embed_plain of the single-channel graph carrying
    feature column i; labels carry the channel index, giving D = |family|*m.
    """
    if len(family) == 0:
        raise EmbeddingError("empty pattern family")
    blocks = []
    labels: list[str] = []
    for i in range(g.m):
        cols = _family_counts(g, i, family, threads=threads)
        blocks.append(np.column_stack([_as_float_column(c) for c in cols]))
        labels.extend(f"{p.name}:ch{i}" for p in family)
    values = np.hstack(blocks)
    return EmbeddingMatrix(values, tuple(labels), source=f"{g.name}|{family.kind}|tensor")


def append_raw_features(e: EmbeddingMatrix, g: FeaturedGraph) -> EmbeddingMatrix:
    """Adjoin the graph's raw feature columns, labeled rawfeat:<j>."""
    if g.n != e.n:
        raise EmbeddingError(f"embedding has {e.n} rows, graph has {g.n} nodes")
    values = np.hstack([e.values, g.features])
    labels = e.column_labels + tuple(f"rawfeat:{j}" for j in range(g.m))
    return EmbeddingMatrix(values, labels, source=e.source + "+rawfeat")


def concat_ensemble(*embeddings: EmbeddingMatrix) -> EmbeddingMatrix:
    """Column-wise concatenation of embeddings over the same node set."""
    if not embeddings:
        raise EmbeddingError("nothing to concatenate")
    first = embeddings[0]
    for e in embeddings[1:]:
        if e.n != first.n:
            raise EmbeddingError(f"row mismatch: {first.n} vs {e.n}")
    labels: list[str] = []
    for e in embeddings:
        labels.extend(e.column_labels)
    if len(set(labels)) != len(labels):
        dup = sorted({l for l in labels if labels.count(l) > 1})
        raise EmbeddingError(f"duplicate labels in ensemble: {dup[:5]}")
    values = np.hstack([e.values for e in embeddings])
    source = "+".join(e.source for e in embeddings)
    return EmbeddingMatrix(values, tuple(labels), source=source)


def log_scale(e: EmbeddingMatrix) -> EmbeddingMatrix:
    """Signed log compression x -> sign(x) * ln(1 + |x|), keeping 0 at 0."""
    values = np.sign(e.values) * np.log1p(np.abs(e.values))
    labels = tuple("log:" + l for l in e.column_labels)
    return EmbeddingMatrix(values, labels, source=e.source)


def density(
    e: EmbeddingMatrix, g: FeaturedGraph, family: PatternFamily
) -> EmbeddingMatrix:
    """Normalize each count column by the number of root-fixing maps.

    A pattern of order k admits n^(k-1) maps into an n-node graph once the
    root is pinned, so plain-graph densities are proportions in [0, 1].
    Every column label must resolve to a family pattern.
    """
    orders = {p.name: p.order for p in family}
    cols = []
    for label in e.column_labels:
        base, _ = _split_transforms(label)
        if base.startswith("rawfeat:"):
            raise EmbeddingError(f"column {label!r} is a raw feature, not a count")
        name = _base_pattern_name(base)
        if name not in orders:
            raise EmbeddingError(
                f"column {label!r} does not match any pattern in the family"
            )
        cols.append(float(g.n) ** (orders[name] - 1))
    values = e.values / np.array(cols)[np.newaxis, :]
    labels = tuple("density:" + l for l in e.column_labels)
    return EmbeddingMatrix(values, labels, source=e.source)


# --- label round trip -----------------------------------------------------


def _split_transforms(label: str) -> tuple[str, list[str]]:
    transforms = []
    rest = label
    while True:
        if rest.startswith("log:"):
            transforms.append("log")
            rest = rest[4:]
        elif rest.startswith("density:"):
            transforms.append("density")
            rest = rest[8:]
        else:
            return rest, transforms


def _base_pattern_name(base: str) -> str:
    name, sep, ch = base.rpartition(":")
    if not sep or not ch.startswith("ch"):
        raise EmbeddingError(f"malformed column label base {base!r}")
    return name


def recompute_column(
    label: str, g: FeaturedGraph, family: PatternFamily
) -> np.ndarray:
    """Recompute a single embedding column from its label.

    The explainability contract: parsing the label and rerunning the counts
    on the same (preprocessed) graph reproduces the stored column.
    """
    base, transforms = _split_transforms(label)
    if base.startswith("rawfeat:"):
        j = int(base[len("rawfeat:") :])
        col = np.asarray(g.features[:, j], dtype=np.float64)
        order = None
    else:
        name = _base_pattern_name(base)
        ch = int(base.rpartition(":")[2][2:])
        matches = [p for p in family if p.name == name]
        if not matches:
            raise EmbeddingError(f"label {label!r}: pattern {name!r} not in family")
        pattern = matches[0]
        col = _as_float_column(count_rooted(g, ch, pattern))
        order = pattern.order
    for t in reversed(transforms):
        if t == "density":
            if order is None:
                raise EmbeddingError(f"label {label!r}: density over raw features")
            col = col / float(g.n) ** (order - 1)
        else:
            col = np.sign(col) * np.log1p(np.abs(col))
    return col


# --- file formats ---------------------------------------------------------


def write_embedding_csv(e: EmbeddingMatrix, path, node_id_column: bool = True) -> None:
    """CSV export: header of column labels, one row per node."""
    header = (["node_id"] if node_id_column else []) + list(e.column_labels)
    lines = [",".join(header)]
    for v in range(e.n):
        cells = ([str(v)] if node_id_column else []) + [
            repr(float(x)) for x in e.values[v]
        ]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_embedding_csv(path) -> EmbeddingMatrix:
    lines = [l for l in Path(path).read_text().splitlines() if l.strip()]
    if len(lines) < 2:
        raise EmbeddingError(f"{path}: no data rows")
    header = [c.strip() for c in lines[0].split(",")]
    drop_first = header and header[0] == "node_id"
    labels = header[1:] if drop_first else header
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        if drop_first:
            cells = cells[1:]
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise EmbeddingError(f"{path}: non-numeric embedding cell") from None
    values = np.array(rows, dtype=np.float64)
    if values.shape[1] != len(labels):
        raise EmbeddingError(f"{path}: ragged rows vs header")
    return EmbeddingMatrix(values, tuple(labels), source=str(path))


def write_embedding_binary(e: EmbeddingMatrix, path) -> None:
    """Compact format: magic, u64 n, u64 D, length-prefixed labels, f64 rows.

    All integers little-endian; each label is a u32 byte length followed by
    UTF-8 bytes; values are row-major float64.
    """
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<QQ", e.n, e.dim))
        for label in e.column_labels:
            raw = label.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
        fh.write(np.ascontiguousarray(e.values, dtype="<f8").tobytes())


def read_embedding_binary(path) -> EmbeddingMatrix:
    blob = Path(path).read_bytes()
    if blob[: len(BINARY_MAGIC)] != BINARY_MAGIC:
        raise EmbeddingError(f"{path}: bad magic, not an embedding file")
    off = len(BINARY_MAGIC)
    n, d = struct.unpack_from("<QQ", blob, off)
    off += 16
    labels = []
    for _ in range(d):
        (ln,) = struct.unpack_from("<I", blob, off)
        off += 4
        labels.append(blob[off : off + ln].decode("utf-8"))
        off += ln
    need = n * d * 8
    if len(blob) - off != need:
        raise EmbeddingError(f"{path}: expected {need} value bytes, got {len(blob) - off}")
    values = np.frombuffer(blob, dtype="<f8", offset=off).reshape(n, d).copy()
    return EmbeddingMatrix(values, tuple(labels), source=str(path))


def read_embedding(path) -> EmbeddingMatrix:
    """Load either format, sniffing the binary magic."""
    with open(path, "rb") as fh:
        head = fh.read(len(BINARY_MAGIC))
    if head == BINARY_MAGIC:
        return read_embedding_binary(path)
    return read_embedding_csv(path)
