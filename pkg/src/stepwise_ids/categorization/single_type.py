"""Single-type categorization: one attack-vs-Normal model per attack, checked in a fixed order."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..dataset.core import Dataset, relabel_binary, restrict_labels
from ..dataset.labels import AttackLabel, by_count, parse_label
from ..errors import MissingClass
from ..learners import TrainConfig, train
from ..learners.base import check_width
from ..metrics import BinaryConfusion, MulticlassConfusion, _pct, far, overall_error, und
from ..seeding import derive_seed
from .report import CategorizationReport, StageMetrics


def _columns(d: Dataset, features) -> np.ndarray:
    if features is None:
        return np.arange(d.n_features)
    return np.asarray(d.schema.columns_for(features), dtype=np.int64)


def train_single_type(train_set: Dataset, attack, cfg: TrainConfig = None, features=None):
    """Binary model on the Normal and ``attack`` records only, ``attack`` Positive."""
    attack = parse_label(attack)
    cfg = cfg or TrainConfig()
    present = train_set.label_set()
    for needed in (AttackLabel.NORMAL, attack):
        if needed not in present:
            raise MissingClass(f"no {needed} training records for the {attack} model")
    sub = restrict_labels(train_set, {AttackLabel.NORMAL, attack}).select_columns(_columns(train_set, features))
    sub = relabel_binary(sub, {attack})
    return train(sub, cfg.with_seed(derive_seed(cfg.seed, "single", attack.value)))


@dataclass
class SingleTypeModelSet:
    models: dict  # AttackLabel -> binary model
    order: list  # checking order, a permutation of the model labels
    columns: np.ndarray
    n_features: int

    def __post_init__(self):
        if sorted(self.order) != sorted(self.models):
            raise ValueError("checking order must be a permutation of the modelled attacks")

    @property
    def labels(self) -> tuple:
        return tuple(sorted(set(self.models) | {AttackLabel.NORMAL}))

    def flags(self, X) -> dict:
        """Positive flags of every model on ``X``."""
        X = check_width(self, X)[:, self.columns]
        return {label: self.models[label].predict(X).astype(bool) for label in self.order}

    def predict(self, X) -> np.ndarray:
        return self.first_hit(self.flags(X), np.shape(X)[0])

    def first_hit(self, flags: dict, n: int) -> np.ndarray:
        out = np.full(n, AttackLabel.NORMAL.code, dtype=np.int8)
        undecided = np.ones(out.size, dtype=bool)
        for label in self.order:
            hit = undecided & flags[label]
            out[hit] = label.code
            undecided &= ~hit
        return out


def train_single_type_set(train_set: Dataset, cfg: TrainConfig = None, attacks=None, order=None,
                          features=None, threads: int = 1) -> SingleTypeModelSet:
    """One model per attack present in training; default order is by training count."""
    cfg = cfg or TrainConfig()
    present = train_set.label_set()
    if attacks is None:
        attacks = [l for l in present if l.is_attack]
    attacks = [parse_label(a) for a in attacks]
    if not attacks:
        raise MissingClass("no attack classes to model")
    counts = {l: int((train_set.attack_labels == l.code).sum()) for l in attacks}
    order = by_count(attacks, counts) if order is None else [parse_label(a) for a in order]
    fit = lambda a: train_single_type(train_set, a, cfg, features)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            models = dict(zip(order, pool.map(fit, order)))
    else:
        models = {a: fit(a) for a in order}
    return SingleTypeModelSet(models, order, _columns(train_set, features), train_set.n_features)


def single_type_categorize(s: SingleTypeModelSet, record) -> AttackLabel:
    """First attack in checking order whose model fires; Normal when none does."""
    values = np.asarray(getattr(record, "values", record), dtype=np.float64).reshape(1, -1)
    return AttackLabel.from_code(int(s.predict(values)[0]))


def evaluate_single_type(s: SingleTypeModelSet, test: Dataset) -> CategorizationReport:
    """Multiclass confusion, each model's own Normal-vs-attack metrics and cross firing rates."""
    truth = test.attack_labels
    flags = s.flags(test.X)
    pred = s.first_hit(flags, len(test))
    confusion = MulticlassConfusion.from_predictions(truth, pred, s.labels)
    normal = truth == AttackLabel.NORMAL.code
    stages, cross = [], {}
    for label in s.order:
        rows = normal | (truth == label.code)
        c = BinaryConfusion.from_predictions(truth[rows] == label.code, flags[label][rows])
        stages.append(StageMetrics(
            stage_id=label.value,
            positives=[label.value],
            reached=int(rows.sum()),
            positive_reached=c.tp + c.fn,
            und_pct=und(c) if c.tp + c.fn else None,
            far_pct=far(c) if c.tn + c.fp else None,
            overall_error_pct=overall_error(c) if c.total else None,
            positive_support=c.tp + c.fn,
        ))
    for source in s.order:
        rows = truth == source.code
        if rows.any():
            cross[source.value] = {m.value: _pct(int(flags[m][rows].sum()), int(rows.sum()))
                                   for m in s.order}
    return CategorizationReport("single-type", confusion, stages, [l.value for l in s.order], cross)


__all__ = [
    "SingleTypeModelSet",
    "evaluate_single_type",
    "single_type_categorize",
    "train_single_type",
    "train_single_type_set",
]
