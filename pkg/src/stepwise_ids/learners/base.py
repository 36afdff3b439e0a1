"""Shared learner contract: training config, gini impurity, predictions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from ..errors import EmptyPartition, NotBinary, NotEncoded, WidthMismatch

KINDS = ("tree", "forest", "logistic")


@dataclass(frozen=True)
class TrainConfig:
    kind: str = "forest"
    # forest / tree
    tree_count: int = 100
    features_per_split: Optional[int] = None  # None: ceil(sqrt(d)) for forests, d for a single tree
    max_depth: int = 25
    min_samples_split: int = 2
    bootstrap: bool = True
    # logistic
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    convergence_tol: float = 1e-6
    seed: int = 0
    # Worker threads for tree growing; never changes results.
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if self.tree_count < 1:
            raise ValueError("tree_count must be >= 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be >= 1")
        if self.max_depth < 0 or self.min_samples_split < 2:
            raise ValueError("max_depth must be >= 0 and min_samples_split >= 2")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def resolve_mtry(self, d: int) -> int:
        if self.features_per_split is not None:
            if self.features_per_split > d:
                raise ValueError(f"features_per_split={self.features_per_split} exceeds {d} features")
            return self.features_per_split
        if self.kind == "tree":
            return d
        return max(1, math.ceil(math.sqrt(d)))

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return asdict(self)


class Prediction(NamedTuple):
    score: float
    label: int  # 1 Positive, 0 Negative


def gini(counts) -> float:
    """Gini impurity ``1 - sum(p_i^2)`` of a class-count vector."""
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    total = sum(counts)
    if total <= 0:
        raise EmptyPartition("gini of an empty partition")
    return 1.0 - sum((c / total) ** 2 for c in counts)


def threshold_labels(scores, threshold: float = 0.5) -> np.ndarray:
    # Ties go Positive.
    return (np.asarray(scores) >= threshold).astype(np.int8)


def check_width(model, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise WidthMismatch(model.n_features, X.shape[1])
    return X


def training_arrays(d):
    """(X, y) of an encoded binary dataset, validating both properties."""
    if not d.schema.all_numeric:
        raise NotEncoded("learners need an encoded (all-numeric) dataset")
    if not d.binary or not np.isin(d.labels, (0, 1)).all():
        raise NotBinary("learners need a binary-labelled dataset (see relabel_binary)")
    return d.X, d.labels.astype(np.int8)


def predict(model, record, threshold: float = 0.5) -> Prediction:
    """Score one encoded record."""
    values = getattr(record, "values", record)
    score = float(model.score(np.asarray(values, dtype=np.float64)[None, :])[0])
    return Prediction(score, int(score >= threshold))
