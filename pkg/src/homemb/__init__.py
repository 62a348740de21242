"""Explainable structural node embeddings from exact homomorphism counts."""

from .counting import (
    CountingError,
    count_cycles,
    count_graph_level,
    count_paths,
    count_rooted,
    count_tree,
)
from .datasets import (
    DESK_CLUSTER_SPEC,
    DESK_PATTERN_SPEC,
    DatasetError,
    LabeledDataset,
    SbmSpec,
    SplitMix64,
    gen_cluster_like,
    gen_pattern_like,
    load_dataset,
    save_dataset,
)
from .embedding import (
    EmbeddingError,
    EmbeddingMatrix,
    append_raw_features,
    concat_ensemble,
    density,
    embed_plain,
    embed_tensor,
    log_scale,
    read_embedding,
    recompute_column,
    write_embedding_binary,
    write_embedding_csv,
)
from .evaluation import (
    EvalReport,
    EvaluationError,
    accuracy,
    cross_validate,
    stratified_folds,
    weighted_accuracy,
)
from .forest import ForestConfig, ForestError, RandomForest
from .graphs import (
    DEFAULT_EPSILON,
    FeaturedGraph,
    GraphError,
    WlColoring,
    load_graph_file,
    load_or_build,
    permute,
    preprocess_zero_features,
    wl_refine,
)
from .oracle import SizeGuardError, brute_force_all, brute_force_rooted
from .patterns import (
    PatternError,
    PatternFamily,
    RootedPattern,
    build_family,
    enumerate_binary_trees,
    enumerate_cycles,
    enumerate_paths,
    enumerate_trees,
    parse_custom_family,
    pattern_from_name,
    rooted_isomorphic,
)

__version__ = "0.1.0"
