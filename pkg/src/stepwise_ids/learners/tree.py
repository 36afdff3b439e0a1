"""CART decision trees for binary labels, grown on weighted gini impurity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import TrainConfig, check_width, threshold_labels, training_arrays

# Impurities closer than this count as equal, so the (feature, threshold) tie rule applies.
TIE_EPS = 1e-12


@dataclass(eq=False)
class DecisionTree:
    """Flat node arrays; ``feature[i] == -1`` marks a leaf.

    A record goes left at node ``i`` when ``x[feature[i]] <= threshold[i]``.
    ``value`` is the positive-class fraction of the training samples that
    reached the node and ``n_samples`` their count (bootstrap duplicates included).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    n_features: int
    schema_fingerprint: str = ""

    kind = "tree"

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.node_count, dtype=np.int64)
        for i in range(self.node_count):  # children always follow their parent
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        X = check_width(self, X)
        node = np.zeros(len(X), dtype=np.int64)
        active = np.arange(len(X))
        while active.size:
            f = self.feature[node[active]]
            internal = f >= 0
            active, f = active[internal], f[internal]
            if not active.size:
                break
            current = node[active]
            go_left = X[active, f] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
        return node

    def score(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return threshold_labels(self.score(X), threshold)


def _feature_split(v, y, n_pos):
    """Best threshold on one feature: (weighted gini, threshold), or None if constant."""
    order = np.argsort(v, kind="stable")
    vs = v[order]
    cut = np.flatnonzero(vs[1:] != vs[:-1])
    if cut.size == 0:
        return None
    n = len(v)
    pos_left = np.cumsum(y[order], dtype=np.int64)[cut].astype(np.float64)
    n_left = cut + 1.0
    n_right = n - n_left
    pos_right = n_pos - pos_left
    impurity = (2.0 * pos_left * (n_left - pos_left) / n_left
                + 2.0 * pos_right * (n_right - pos_right) / n_right) / n
    best = impurity.min()
    i = int(np.flatnonzero(impurity <= best + TIE_EPS)[0])
    lo, hi = vs[cut[i]], vs[cut[i] + 1]
    threshold = 0.5 * (lo + hi)
    if not lo <= threshold < hi:  # adjacent floats
        threshold = lo
    return float(impurity[i]), float(threshold)


def best_split(X, y, rows, mtry, rng):
    """Search a random subset of ``mtry`` non-constant features at a node.

    Returns ``(impurity, feature, threshold)`` or None.  Ties on impurity go
    to the lower feature index, then the lower threshold.
    """
    yr = y[rows]
    n_pos = int(yr.sum())
    candidates = []
    for f in rng.permutation(X.shape[1]):
        if len(candidates) >= mtry:
            break
        v = X[rows, f]
        if v.min() == v.max():
            continue
        split = _feature_split(v, yr, n_pos)
        if split is not None:
            candidates.append((split[0], int(f), split[1]))
    if not candidates:
        return None
    best = min(c[0] for c in candidates)
    return min((c for c in candidates if c[0] <= best + TIE_EPS), key=lambda c: (c[1], c[2]))


def grow_tree(X, y, rows, mtry, max_depth, min_samples_split, rng, schema_fingerprint=""):
    """Grow one tree on ``X[rows]``; ``rows`` may repeat (bootstrap)."""
    X = np.asfortranarray(X, dtype=np.float64)
    feature, threshold, left, right, value, n_samples = [], [], [], [], [], []

    def build(rows, depth):
        node = len(feature)
        n = len(rows)
        n_pos = int(y[rows].sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(n_pos / n)
        n_samples.append(n)
        if n_pos == 0 or n_pos == n or depth >= max_depth or n < min_samples_split:
            return node
        split = best_split(X, y, rows, mtry, rng)
        parent = 2.0 * n_pos * (n - n_pos) / (n * n)
        if split is None or not split[0] < parent - TIE_EPS:
            return node
        _, f, t = split
        go_left = X[rows, f] <= t
        feature[node] = f
        threshold[node] = t
        left[node] = build(rows[go_left], depth + 1)
        right[node] = build(rows[~go_left], depth + 1)
        return node

    build(np.asarray(rows, dtype=np.int64), 0)
    return DecisionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
        np.array(n_samples, dtype=np.int64),
        X.shape[1],
        schema_fingerprint,
    )


def train_tree(d, cfg: TrainConfig = None, rng=None) -> DecisionTree:
    """Fit a single CART tree on every record of an encoded, binary dataset."""
    cfg = cfg or TrainConfig(kind="tree")
    X, y = training_arrays(d)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    return grow_tree(X, y, np.arange(len(y)), cfg.resolve_mtry(X.shape[1]), cfg.max_depth,
                     cfg.min_samples_split, rng, d.schema.fingerprint())
