"""Downstream evaluation: stratified cross-validation with random forests.

Node samples are pooled into one table (rows = nodes, columns = embedding
features), split into stratified folds, and scored with plain accuracy plus
class-balanced (macro-recall) accuracy.  Per-column importances are averaged
over every trained forest and keyed by the embedding column labels, which is
what makes the final report explainable: each score points at one named
pattern/channel/transform combination.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .forest import ForestConfig, ForestError, RandomForest


class EvaluationError(ValueError):
    """Invalid evaluation inputs or protocol parameters."""


@dataclass(frozen=True)
class EvalReport:
    accuracy_mean: float
    accuracy_std: float
    weighted_accuracy_mean: float
    per_fold: tuple[dict, ...]
    importances: dict[str, float]

    def to_json(self) -> dict:
        return {
            "accuracy_mean": self.accuracy_mean,
            "accuracy_std": self.accuracy_std,
            "weighted_accuracy_mean": self.weighted_accuracy_mean,
            "per_fold": list(self.per_fold),
            "importances": dict(self.importances),
        }

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"
        )


def stratified_folds(y: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Partition indices into k folds preserving class proportions (±1).

    Per class the indices are shuffled with a seeded generator and dealt
    round-robin, so the folds are disjoint, covering, and deterministic.
    """
    y = np.asarray(y, dtype=np.int64)
    if k < 2:
        raise EvaluationError(f"need at least 2 folds, got {k}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        if members.size < k:
            raise EvaluationError(
                f"class {int(cls)} has only {members.size} samples, fewer than "
                f"{k} folds"
            )
        members = rng.permutation(members)
        for i, idx in enumerate(members):
            folds[i % k].append(int(idx))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def weighted_accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    """Class-balanced accuracy: mean per-class recall over classes in truth."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape:
        raise EvaluationError(f"shape mismatch {pred.shape} vs {truth.shape}")
    if truth.size == 0:
        raise EvaluationError("empty truth vector")
    recalls = []
    for cls in np.unique(truth):
        mask = truth == cls
        recalls.append(float(np.mean(pred[mask] == cls)))
    return float(np.mean(recalls))


def accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    if pred.shape != truth.shape:
        raise EvaluationError(f"shape mismatch {pred.shape} vs {truth.shape}")
    return float(np.mean(pred == truth))


def cross_validate(
    x: np.ndarray,
    y: np.ndarray,
    column_labels,
    config: ForestConfig | None = None,
    folds: int = 10,
    repetitions: int = 10,
) -> EvalReport:
    """Repeated stratified k-fold CV; aggregates over folds x repetitions.

    Each repetition reshuffles the folds and each (repetition, fold) pair
    trains its own forest on a seed derived from the config seed, so the
    whole protocol is reproducible from a single integer.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise EvaluationError(f"X {x.shape} does not match y {y.shape}")
    column_labels = list(column_labels)
    if len(column_labels) != x.shape[1]:
        raise EvaluationError(
            f"{x.shape[1]} columns but {len(column_labels)} labels"
        )
    if repetitions < 1:
        raise EvaluationError("need at least one repetition")
    cfg = config or ForestConfig()
    num_classes = int(y.max()) + 1 if y.size else 0
    per_fold: list[dict] = []
    importance_sum = np.zeros(x.shape[1])
    fits = 0
    for rep in range(repetitions):
        fold_seed = int(
            np.random.SeedSequence((cfg.seed, rep)).generate_state(1)[0]
        )
        for f, test_idx in enumerate(stratified_folds(y, folds, fold_seed)):
            mask = np.ones(x.shape[0], dtype=bool)
            mask[test_idx] = False
            train_idx = np.flatnonzero(mask)
            forest_seed = int(
                np.random.SeedSequence((cfg.seed, rep, f)).generate_state(1)[0]
            )
            fold_cfg = replace(cfg, seed=forest_seed)
            try:
                forest = RandomForest(fold_cfg).fit(
                    x[train_idx], y[train_idx], num_classes=num_classes
                )
            except ForestError as exc:
                raise EvaluationError(f"repetition {rep} fold {f}: {exc}") from exc
            pred = forest.predict(x[test_idx])
            per_fold.append(
                {
                    "repetition": rep,
                    "fold": f,
                    "accuracy": accuracy(pred, y[test_idx]),
                    "weighted_accuracy": weighted_accuracy(pred, y[test_idx]),
                }
            )
            importance_sum += forest.feature_importances()
            fits += 1
    accs = np.array([p["accuracy"] for p in per_fold])
    waccs = np.array([p["weighted_accuracy"] for p in per_fold])
    importances = importance_sum / fits
    total = importances.sum()
    if total > 0:
        importances = importances / total
    return EvalReport(
        accuracy_mean=float(accs.mean()),
        accuracy_std=float(accs.std()),
        weighted_accuracy_mean=float(waccs.mean()),
        per_fold=tuple(per_fold),
        importances={l: float(s) for l, s in zip(column_labels, importances)},
    )
