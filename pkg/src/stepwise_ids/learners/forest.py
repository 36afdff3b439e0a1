"""Bagged random forests of CART trees."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .base import TrainConfig, check_width, threshold_labels, training_arrays
from .tree import DecisionTree, grow_tree


@dataclass(eq=False)
class RandomForestModel:
    trees: list
    prior: float  # positive-class fraction of the training set
    n_features: int
    schema_fingerprint: str = ""

    kind = "forest"

    def tree_scores(self, X) -> np.ndarray:
        X = check_width(self, X)
        return np.stack([tree.score(X) for tree in self.trees])

    def score(self, X) -> np.ndarray:
        return self.tree_scores(X).mean(axis=0)

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return threshold_labels(self.score(X), threshold)


def tree_streams(seed: int, count: int) -> list:
    """One independent generator per tree, derived from the seed alone."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def fit_forest(X, y, cfg: TrainConfig, schema_fingerprint: str = "") -> RandomForestModel:
    X = np.asfortranarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int8)
    n, d = X.shape
    mtry = cfg.resolve_mtry(d)
    streams = tree_streams(cfg.seed, cfg.tree_count)

    def grow(i: int) -> DecisionTree:
        rng = streams[i]
        rows = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        return grow_tree(X, y, rows, mtry, cfg.max_depth, cfg.min_samples_split, rng,
                         schema_fingerprint)

    if cfg.threads > 1 and cfg.tree_count > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            trees = list(pool.map(grow, range(cfg.tree_count)))
    else:
        trees = [grow(i) for i in range(cfg.tree_count)]
    return RandomForestModel(trees, float(y.mean()), d, schema_fingerprint)


def train_forest(d, cfg: TrainConfig = None) -> RandomForestModel:
    cfg = cfg or TrainConfig()
    X, y = training_arrays(d)
    return fit_forest(X, y, cfg, d.schema.fingerprint())
