"""Command-line interface: enumeration, embedding, ground truth, data, eval.

Exit codes: 0 success, 1 usage error, 2 data/input error, 3 size-guard
refusal.  Every artifact-producing run writes a `run.resolved.json` with the
fully resolved configuration next to its outputs, and logs pattern counts
plus per-family timings to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .counting import CountingError, count_rooted
from .datasets import (
    DESK_CLUSTER_SPEC,
    DESK_PATTERN_SPEC,
    DatasetError,
    LabeledDataset,
    SbmSpec,
    gen_cluster_like,
    gen_pattern_like,
    load_dataset,
    save_dataset,
)
from .embedding import (
    EmbeddingError,
    EmbeddingMatrix,
    _as_float_column,
    append_raw_features,
    concat_ensemble,
    density,
    embed_plain,
    embed_tensor,
    log_scale,
    read_embedding,
    write_embedding_binary,
    write_embedding_csv,
)
from .evaluation import EvaluationError, cross_validate
from .forest import ForestConfig, ForestError
from .graphs import (
    DEFAULT_EPSILON,
    FeaturedGraph,
    GraphError,
    load_graph_file,
    preprocess_zero_features,
    read_labels,
)
from .oracle import SizeGuardError, brute_force_all, brute_force_rooted
from .patterns import (
    FAMILY_BUILDERS,
    PatternError,
    PatternFamily,
    build_family,
    parse_custom_family,
    pattern_from_name,
)

log = logging.getLogger("homemb")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_GUARD = 3

_DATA_ERRORS = (
    GraphError,
    PatternError,
    CountingError,
    EmbeddingError,
    DatasetError,
    EvaluationError,
    ForestError,
    OSError,
    json.JSONDecodeError,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this artifact reserves 2 for
    # data errors, so usage problems are rerouted through _UsageError.
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _default_threads() -> int:
    env = os.environ.get("HOMCOUNT_THREADS", "").strip()
    if env:
        try:
            n = int(env)
            if n >= 1:
                return n
        except ValueError:
            pass
        log.warning("ignoring invalid HOMCOUNT_THREADS=%r", env)
    return os.cpu_count() or 1


def _parse_family_arg(spec: str) -> PatternFamily:
    """--family value: kind[:max_order] for built-ins, or custom:FILE."""
    kind, sep, rest = spec.partition(":")
    if kind == "custom":
        if not rest:
            raise _UsageError("custom family needs a file: custom:PATH")
        return parse_custom_family(rest)
    if kind not in FAMILY_BUILDERS:
        raise _UsageError(
            f"unknown family {kind!r}; choose from "
            f"{sorted(FAMILY_BUILDERS)} or custom:FILE"
        )
    if sep and rest:
        try:
            return build_family(kind, int(rest))
        except ValueError:
            raise _UsageError(f"bad max order in family spec {spec!r}") from None
    return build_family(kind)


def _family_desc(fam: PatternFamily) -> str:
    return f"{fam.kind}:{fam.max_order}({len(fam)})"


def _write_resolved(directory: Path, payload: dict) -> None:
    payload = {"version": __version__, **payload}
    (directory / "run.resolved.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )


def _family_embedding(
    g: FeaturedGraph,
    fam: PatternFamily,
    tensor: bool,
    threads: int,
    timeout: float | None,
):
    """One family's embedding; honors a per-family timeout when given.

    With a timeout, columns are computed one at a time in label order; once
    the deadline passes (checked after each column, with the first column
    always completed) the family is cut short and reported as partial.
    Returns (embedding, partial_info_or_None).
    """
    if timeout is None:
        e = (
            embed_tensor(g, fam, threads=threads)
            if tensor
            else embed_plain(g, fam, threads=threads)
        )
        return e, None
    channels = list(range(g.m)) if tensor else [0]
    tasks = [(ch, p) for ch in channels for p in fam]
    start = time.perf_counter()
    cols, labels = [], []
    for ch, p in tasks:
        if cols and time.perf_counter() - start > timeout:
            break
        cols.append(_as_float_column(count_rooted(g, ch, p)))
        labels.append(f"{p.name}:ch{ch}")
    partial = None
    if len(cols) < len(tasks):
        partial = {"computed": len(cols), "total": len(tasks)}
    e = EmbeddingMatrix(
        np.column_stack(cols), tuple(labels), source=f"{g.name}|{fam.kind}"
    )
    return e, partial


def _embed_one_graph(g_raw: FeaturedGraph, families, args):
    """Full embedding of one graph under the CLI transform flags.

    Without --tensor the structural embedding is computed on the plain
    (all-ones) version of the graph; with --tensor zero features are first
    replaced by epsilon and every channel contributes a column block.
    --append-features always appends the original raw feature columns.
    """
    if args.tensor:
        g = preprocess_zero_features(g_raw, args.epsilon)
    else:
        g = g_raw.as_plain()
    parts = []
    partials = {}
    timeout = getattr(args, "timeout", None)
    for fam in families:
        t0 = time.perf_counter()
        e, partial = _family_embedding(g, fam, args.tensor, args.threads, timeout)
        if args.density:
            e = density(e, g, fam)
        if args.log:
            e = log_scale(e)
        log.info(
            "graph %s family %s: %d columns in %.3fs%s",
            g_raw.name, _family_desc(fam), e.dim, time.perf_counter() - t0,
            " (partial, timed out)" if partial else "",
        )
        if partial:
            partials[_family_desc(fam)] = partial
        parts.append(e)
    emb = parts[0] if len(parts) == 1 else concat_ensemble(*parts)
    if args.append_features:
        emb = append_raw_features(emb, g_raw)
    return emb, partials


def _save_embedding(emb: EmbeddingMatrix, path: Path, fmt: str) -> None:
    if fmt == "binary":
        write_embedding_binary(emb, path)
    else:
        write_embedding_csv(emb, path)


# --- subcommands ----------------------------------------------------------


def cmd_patterns(args) -> int:
    if args.custom:
        fam = parse_custom_family(args.custom)
    else:
        fam = build_family(args.kind, args.max_order)
    log.info("family %s: %d patterns, per order %s", fam.kind, len(fam), fam.orders())
    print(fam.describe())
    return EXIT_OK


def cmd_embed(args) -> int:
    if args.density and args.log:
        raise _UsageError("homemb embed: error: --density excludes --log in one pass")
    g_raw = load_graph_file(args.graph, args.features)
    families = [_parse_family_arg(s) for s in args.family]
    emb, partials = _embed_one_graph(g_raw, families, args)
    out = Path(args.out)
    _save_embedding(emb, out, args.format)
    log.info("wrote %s (%d nodes x %d columns)", out, emb.n, emb.dim)
    _write_resolved(
        out.parent if out.parent != Path("") else Path("."),
        {
            "command": "embed",
            "graph": str(args.graph),
            "features": str(args.features) if args.features else None,
            "families": [_family_desc(f) for f in families],
            "tensor": args.tensor,
            "log": args.log,
            "density": args.density,
            "append_features": args.append_features,
            "epsilon": args.epsilon,
            "threads": args.threads,
            "timeout": args.timeout,
            "format": args.format,
            "out": str(out),
            "partial_families": partials,
        },
    )
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = load_graph_file(args.graph, args.features)
    if args.custom:
        fam = parse_custom_family(args.custom)
        if args.pattern:
            matches = [p for p in fam if p.name == args.pattern]
            if not matches:
                raise PatternError(
                    f"pattern {args.pattern!r} not found in {args.custom}"
                )
            pattern = matches[0]
        elif len(fam) == 1:
            pattern = fam.patterns[0]
        else:
            raise PatternError(
                f"{args.custom} holds {len(fam)} patterns; pick one with --pattern"
            )
    elif args.pattern:
        pattern = pattern_from_name(args.pattern)
    else:
        raise _UsageError("homemb oracle: error: need --pattern or --custom")
    if args.node is not None:
        val = brute_force_rooted(g, args.channel, pattern, args.node, force=args.force)
        print(val)
    else:
        counts = brute_force_all(g, args.channel, pattern, force=args.force)
        for v, val in enumerate(counts):
            print(f"{v}\t{val}")
    return EXIT_OK


def _parse_node_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise _UsageError(f"homemb gen-sbm: error: --nodes wants LO:HI, got {text!r}")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise _UsageError(
            f"homemb gen-sbm: error: non-integer node range {text!r}"
        ) from None


def _build_sbm_spec(args, kind: str, seed: int) -> SbmSpec:
    base = DESK_PATTERN_SPEC if kind == "pattern" else DESK_CLUSTER_SPEC
    lo, hi = _parse_node_range(args.nodes or f"{base.nodes_lo}:{base.nodes_hi}")
    kwargs = dict(
        num_graphs=args.graphs,
        nodes_lo=lo,
        nodes_hi=hi,
        num_communities=args.communities if args.communities is not None else base.num_communities,
        p_intra=args.p if args.p is not None else base.p_intra,
        q_inter=args.q if args.q is not None else base.q_inter,
        seed=seed,
    )
    if kind == "pattern":
        kwargs["pattern_p"] = args.pattern_p if args.pattern_p is not None else base.pattern_p
        kwargs["pattern_q"] = args.pattern_q if args.pattern_q is not None else base.pattern_q
    return SbmSpec(**kwargs)


def _generate(kind: str, spec: SbmSpec) -> LabeledDataset:
    t0 = time.perf_counter()
    ds = gen_cluster_like(spec) if kind == "cluster" else gen_pattern_like(spec)
    edges = sum(len(g.edges) for g in ds.graphs)
    log.info(
        "generated %d %s-like graphs, %d nodes, %d edges in %.2fs",
        len(ds.graphs), kind, ds.total_nodes(), edges, time.perf_counter() - t0,
    )
    return ds


def cmd_gen_sbm(args) -> int:
    spec = _build_sbm_spec(args, args.kind, args.seed)
    ds = _generate(args.kind, spec)
    out = Path(args.out)
    save_dataset(ds, out, spec=spec)
    _write_resolved(out, {"command": "gen-sbm", "kind": args.kind, "spec": spec.to_json(), "out": str(out)})
    log.info("wrote dataset to %s", out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    embs = [read_embedding(p) for p in args.embeddings]
    emb = embs[0] if len(embs) == 1 else concat_ensemble(*embs)
    y = read_labels(args.labels)
    if y.shape[0] != emb.n:
        raise EvaluationError(
            f"{emb.n} embedding rows but {y.shape[0]} labels"
        )
    cfg = ForestConfig(num_trees=args.trees, seed=args.seed)
    t0 = time.perf_counter()
    report = cross_validate(
        emb.values, y, emb.column_labels, cfg, folds=args.folds,
        repetitions=args.reps,
    )
    log.info(
        "evaluated %d samples x %d columns in %.2fs", emb.n, emb.dim,
        time.perf_counter() - t0,
    )
    report_path = Path(args.report)
    report.save(report_path)
    _write_resolved(
        report_path.parent if report_path.parent != Path("") else Path("."),
        {
            "command": "evaluate",
            "embeddings": [str(p) for p in args.embeddings],
            "labels": str(args.labels),
            "folds": args.folds,
            "reps": args.reps,
            "trees": args.trees,
            "seed": args.seed,
            "report": str(report_path),
        },
    )
    print(
        f"accuracy_mean={report.accuracy_mean:.4f} "
        f"accuracy_std={report.accuracy_std:.4f} "
        f"weighted_accuracy_mean={report.weighted_accuracy_mean:.4f}"
    )
    return EXIT_OK


def cmd_pipeline(args) -> int:
    if args.density and args.log:
        raise _UsageError("homemb pipeline: error: --density excludes --log in one pass")
    if bool(args.dataset) == bool(args.gen):
        raise _UsageError(
            "homemb pipeline: error: exactly one of --dataset or --gen is required"
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.dataset:
        ds = load_dataset(args.dataset)
        spec_json = None
        log.info("loaded dataset %s: %d graphs", ds.name, len(ds.graphs))
    else:
        spec = _build_sbm_spec(args, args.gen, args.data_seed)
        ds = _generate(args.gen, spec)
        spec_json = spec.to_json()
    families = [_parse_family_arg(s) for s in args.family]
    t0 = time.perf_counter()
    blocks = []
    partials: dict = {}
    if args.threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        one = argparse.Namespace(**{**vars(args), "threads": 1})
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(
                pool.map(lambda g: _embed_one_graph(g, families, one), ds.graphs)
            )
    else:
        results = [_embed_one_graph(g, families, args) for g in ds.graphs]
    labels_ref = None
    for g, (emb, part) in zip(ds.graphs, results):
        if labels_ref is None:
            labels_ref = emb.column_labels
        elif emb.column_labels != labels_ref:
            raise EmbeddingError(
                f"graph {g.name!r} produced different columns than the first graph"
            )
        partials.update(part)
        blocks.append(emb.values)
    stacked = EmbeddingMatrix(
        np.vstack(blocks), labels_ref, source=f"{ds.name}|pipeline"
    )
    log.info(
        "embedded %d nodes x %d columns in %.2fs",
        stacked.n, stacked.dim, time.perf_counter() - t0,
    )
    emb_path = out / ("embeddings.bin" if args.format == "binary" else "embeddings.csv")
    _save_embedding(stacked, emb_path, args.format)
    y = ds.pooled_labels()
    cfg = ForestConfig(num_trees=args.trees, seed=args.seed)
    t1 = time.perf_counter()
    report = cross_validate(
        stacked.values, y, stacked.column_labels, cfg, folds=args.folds,
        repetitions=args.reps,
    )
    log.info("evaluation took %.2fs", time.perf_counter() - t1)
    report.save(out / "report.json")
    _write_resolved(
        out,
        {
            "command": "pipeline",
            "dataset": str(args.dataset) if args.dataset else None,
            "generated": args.gen,
            "spec": spec_json,
            "families": [_family_desc(f) for f in families],
            "tensor": args.tensor,
            "log": args.log,
            "density": args.density,
            "append_features": args.append_features,
            "epsilon": args.epsilon,
            "folds": args.folds,
            "reps": args.reps,
            "trees": args.trees,
            "seed": args.seed,
            "threads": args.threads,
            "format": args.format,
            "out": str(out),
            "partial_families": partials,
        },
    )
    print(
        f"accuracy_mean={report.accuracy_mean:.4f} "
        f"weighted_accuracy_mean={report.weighted_accuracy_mean:.4f}"
    )
    return EXIT_OK


# --- parser ---------------------------------------------------------------


def _add_embed_flags(p: argparse.ArgumentParser):
    p.add_argument("--family", action="append", required=True,
                   help="kind[:max_order] or custom:FILE; repeatable")
    p.add_argument("--tensor", action="store_true",
                   help="weighted counts per feature channel (else structural)")
    p.add_argument("--log", action="store_true", help="signed log1p scaling")
    p.add_argument("--density", action="store_true",
                   help="normalize counts to densities (excludes --log)")
    p.add_argument("--append-features", action="store_true",
                   help="append the raw feature columns")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                   help="replacement for zero features in tensor mode")
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: HOMCOUNT_THREADS or cpu count)")


def build_parser() -> _Parser:
    parser = _Parser(prog="homemb", description=__doc__)
    parser.add_argument("--version", action="version", version=f"homemb {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true",
                        help="suppress progress logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("patterns", help="enumerate a pattern family")
    p.add_argument("--kind", choices=sorted(FAMILY_BUILDERS), default="trees")
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--custom", default=None, help="custom family file")
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("embed", help="embed one graph")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--features", default=None, help="node feature CSV")
    p.add_argument("--out", required=True, help="output embedding file")
    p.add_argument("--timeout", type=float, default=None,
                   help="per-family time budget in seconds; partial columns are kept")
    _add_embed_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("oracle", help="brute-force ground-truth counts")
    p.add_argument("--graph", required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--pattern", default=None, help="canonical pattern name")
    p.add_argument("--custom", default=None, help="custom family file")
    p.add_argument("--node", type=int, default=None, help="single target node")
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--force", action="store_true", help="override the size guard")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen-sbm", help="generate a synthetic SBM dataset")
    p.add_argument("--kind", choices=("cluster", "pattern"), required=True)
    p.add_argument("--graphs", type=int, default=200)
    p.add_argument("--nodes", default=None,
                   help="node count range LO:HI (default from the desk-scale spec)")
    p.add_argument("--communities", type=int, default=None,
                   help="communities (cluster: classes, default 6; "
                        "pattern: background blocks, default 5)")
    p.add_argument("--p", type=float, default=None, help="intra-community density")
    p.add_argument("--q", type=float, default=None, help="inter-community density")
    p.add_argument("--pattern-p", type=float, default=None)
    p.add_argument("--pattern-q", type=float, default=None)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_sbm)

    p = sub.add_parser("evaluate", help="cross-validate saved embeddings")
    p.add_argument(
        "--embeddings",
        nargs="+",
        required=True,
        help="embedding files; several are joined column-wise over the same rows",
    )
    p.add_argument("--labels", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True, help="output JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="dataset -> embeddings -> evaluation")
    p.add_argument("--dataset", default=None, help="existing dataset directory")
    p.add_argument("--gen", choices=("cluster", "pattern"), default=None,
                   help="generate a dataset instead of loading one")
    p.add_argument("--graphs", type=int, default=200)
    p.add_argument("--nodes", default=None, help="node count range LO:HI")
    p.add_argument("--communities", type=int, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--pattern-p", type=float, default=None)
    p.add_argument("--pattern-q", type=float, default=None)
    p.add_argument("--data-seed", type=int, default=7)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    _add_embed_flags(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING if args.quiet else logging.INFO,
        format="[homemb] %(message)s",
    )
    if getattr(args, "threads", "absent") is None:
        args.threads = _default_threads()
    try:
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SizeGuardError as exc:
        log.error("size guard: %s", exc)
        return EXIT_GUARD
    except _DATA_ERRORS as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
