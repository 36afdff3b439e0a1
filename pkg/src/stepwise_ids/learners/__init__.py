import numpy as np

from .base import KINDS, Prediction, TrainConfig, gini, predict, threshold_labels, training_arrays
from .forest import RandomForestModel, fit_forest, train_forest
from .logistic import LogisticModel, fit_logistic, loss_and_grad, train_logistic
from .serialization import FORMAT_VERSION, dumps, load_model, loads, model_hash, save_model
from .tree import DecisionTree, grow_tree, train_tree


def fit(X, y, cfg: TrainConfig, schema_fingerprint: str = ""):
    """Fit the learner named by ``cfg.kind`` on raw arrays."""
    if cfg.kind == "logistic":
        return fit_logistic(X, y, cfg, schema_fingerprint)
    if cfg.kind == "forest":
        return fit_forest(X, y, cfg, schema_fingerprint)
    rng = np.random.default_rng(cfg.seed)
    y = np.asarray(y, dtype=np.int8)
    return grow_tree(X, y, np.arange(len(y)), cfg.resolve_mtry(np.shape(X)[1]), cfg.max_depth,
                     cfg.min_samples_split, rng, schema_fingerprint)


def train(d, cfg: TrainConfig):
    """Fit the learner named by ``cfg.kind`` on an encoded binary dataset."""
    X, y = training_arrays(d)
    return fit(X, y, cfg, d.schema.fingerprint())
