"""Greedy best-first forward feature selection around any learner.

Selection works on source features: the one-hot block of a categorical
feature is added or withheld as one unit.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset.core import Dataset, relabel_binary
from .dataset.labels import ATTACK_LABELS, AttackLabel, parse_label
from .errors import CriterionUnavailable, EmptyFeaturePool
from .learners import TrainConfig, fit
from .metrics import BinaryConfusion, far, overall_error, und

CRITERIA = ("overall_error", "far", "und", "per_attack_error")


@dataclass(frozen=True)
class SelectionCriterion:
    kind: str = "overall_error"
    attack: Optional[AttackLabel] = None
    split: str = "holdout"  # or "test"
    holdout_fraction: float = 0.2

    def __post_init__(self):
        if self.kind not in CRITERIA:
            raise ValueError(f"unknown criterion {self.kind!r}")
        if self.kind == "per_attack_error" and self.attack is None:
            raise ValueError("per_attack_error needs an attack label")
        if self.split not in ("holdout", "test"):
            raise ValueError(f"unknown evaluation split {self.split!r}")
        if self.split == "holdout" and not 0 < self.holdout_fraction < 1:
            raise ValueError("holdout_fraction must lie in (0, 1)")

    @classmethod
    def parse(cls, text: str, split="holdout", holdout_fraction=0.2) -> "SelectionCriterion":
        """``error``, ``far``, ``und`` or ``attack:<label>``."""
        text = text.strip()
        if text.lower().startswith("attack:"):
            return cls("per_attack_error", parse_label(text.split(":", 1)[1]), split, holdout_fraction)
        kind = {"error": "overall_error"}.get(text.lower(), text.lower())
        return cls(kind, None, split, holdout_fraction)

    def __str__(self):
        return f"attack:{self.attack}" if self.kind == "per_attack_error" else self.kind

    def evaluate(self, y_true, y_pred, attack_labels) -> float:
        c = BinaryConfusion.from_predictions(y_true, y_pred)
        try:
            if self.kind == "overall_error":
                return overall_error(c)
            if self.kind == "far":
                return far(c)
            if self.kind == "und":
                return und(c)
        except Exception as exc:
            raise CriterionUnavailable(f"{self}: {exc}") from None
        rows = np.asarray(attack_labels) == self.attack.code
        n = int(rows.sum())
        if n == 0:
            raise CriterionUnavailable(f"no {self.attack} records in the evaluation split")
        wrong = np.asarray(y_pred)[rows] != np.asarray(y_true)[rows]
        return 100 * int(wrong.sum()) / n


@dataclass
class SelectionStep:
    iteration: int
    feature: str
    criterion_pct: float
    wall_s: float
    relative_time: float
    candidates: dict = field(default_factory=dict)  # feature -> criterion value


@dataclass
class SelectionTrace:
    steps: list
    subset: list
    stop_reason: str
    baseline_criterion: float
    baseline_wall_s: float
    criterion: str = "overall_error"
    rejected_candidates: dict = field(default_factory=dict)  # scores of the failed last round

    CSV_COLUMNS = ("iteration", "feature", "criterion_pct", "wall_s", "relative_time")

    def rows(self, timing=True):
        for s in self.steps:
            row = [s.iteration, s.feature, s.criterion_pct]
            if timing:
                row += [s.wall_s, s.relative_time]
            yield row

    def to_csv(self, timing=True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_COLUMNS if timing else self.CSV_COLUMNS[:3])
        writer.writerows(self.rows(timing))
        return buf.getvalue()

    def to_dict(self, timing=True) -> dict:
        steps = []
        for s in self.steps:
            step = {"iteration": s.iteration, "feature": s.feature,
                    "criterion_pct": s.criterion_pct, "candidates": s.candidates}
            if timing:
                step.update(wall_s=s.wall_s, relative_time=s.relative_time)
            steps.append(step)
        out = {
            "criterion": self.criterion,
            "subset": list(self.subset),
            "stop_reason": self.stop_reason,
            "baseline_criterion_pct": self.baseline_criterion,
            "rejected_candidates": self.rejected_candidates,
            "iterations": steps,
        }
        if timing:
            out["baseline_wall_s"] = self.baseline_wall_s
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def deterministic_view(self) -> dict:
        """Everything except wall-clock timings."""
        return self.to_dict(timing=False)


def stratified_holdout(strata, fraction: float, seed: int):
    """(fit_rows, eval_rows): ``fraction`` of each stratum, at least one row when it has two."""
    rng = np.random.default_rng(seed)
    strata = np.asarray(strata)
    eval_rows = []
    for value in np.unique(strata):
        rows = np.flatnonzero(strata == value)
        rows = rows[rng.permutation(rows.size)]
        k = int(round(fraction * rows.size))
        if rows.size >= 2:
            k = min(max(k, 1), rows.size - 1)
        else:
            k = 0
        eval_rows.append(rows[:k])
    eval_rows = np.sort(np.concatenate(eval_rows))
    mask = np.ones(strata.size, dtype=bool)
    mask[eval_rows] = False
    return np.flatnonzero(mask), eval_rows


def _as_binary(d: Dataset) -> Dataset:
    return d if d.binary else relabel_binary(d, ATTACK_LABELS)


class _Evaluator:
    """Trains on one split and scores the criterion on another."""

    def __init__(self, train: Dataset, criterion: SelectionCriterion, cfg: TrainConfig,
                 test: Optional[Dataset] = None):
        train = _as_binary(train)
        if criterion.split == "test":
            if test is None:
                raise ValueError("criterion split 'test' needs a test dataset")
            test = _as_binary(test)
            self.X_fit, self.y_fit = train.X, train.labels
            self.X_eval, self.y_eval, self.a_eval = test.X, test.labels, test.attack_labels
        else:
            fit_rows, eval_rows = stratified_holdout(train.attack_labels, criterion.holdout_fraction,
                                                     cfg.seed)
            X = train.X
            self.X_fit, self.y_fit = X[fit_rows], train.labels[fit_rows]
            self.X_eval, self.y_eval = X[eval_rows], train.labels[eval_rows]
            self.a_eval = train.attack_labels[eval_rows]
        self.criterion = criterion
        self.cfg = cfg
        self.group_columns = train.schema.group_columns()

    def columns(self, groups) -> list:
        return sorted(c for g in groups for c in self.group_columns[g])

    def __call__(self, groups):
        cols = self.columns(groups)
        start = time.perf_counter()
        model = fit(self.X_fit[:, cols], self.y_fit, self.cfg)
        wall = time.perf_counter() - start
        y_pred = model.predict(self.X_eval[:, cols])
        return self.criterion.evaluate(self.y_eval, y_pred, self.a_eval), wall


def _greedy(evaluate: _Evaluator, groups, max_features, baseline_wall, stop_rule=True):
    subset, steps = [], []
    remaining = list(groups)
    incumbent = math.inf
    rejected = {}
    stop = "exhausted"
    while remaining:
        if len(subset) >= max_features:
            stop = "max_features"
            break
        scores, walls = {}, {}
        for g in remaining:
            scores[g], walls[g] = evaluate(subset + [g])
        best_value = min(scores.values())
        # remaining is kept in schema order, so the first minimum is the lowest index
        best = next(g for g in remaining if scores[g] == best_value)
        if stop_rule and not best_value < incumbent:
            rejected = scores
            stop = "no_improvement"
            break
        subset.append(best)
        remaining.remove(best)
        incumbent = best_value
        steps.append(SelectionStep(
            iteration=len(subset),
            feature=best,
            criterion_pct=best_value,
            wall_s=walls[best],
            relative_time=min(1.0, walls[best] / baseline_wall) if baseline_wall > 0 else 1.0,
            candidates=scores,
        ))
    return subset, steps, stop, rejected


def best_first_select(train: Dataset, criterion: SelectionCriterion = None,
                      learner_cfg: TrainConfig = None, max_features: Optional[int] = None,
                      test: Optional[Dataset] = None):
    """Forward selection: add the candidate with the lowest criterion value each round.

    Stops when the best candidate does not strictly improve on the current
    subset, when ``max_features`` is reached, or when no candidates remain.
    Returns ``(subset, trace)``.
    """
    criterion = criterion or SelectionCriterion()
    learner_cfg = learner_cfg or TrainConfig()
    groups = train.schema.groups()
    if not groups:
        raise EmptyFeaturePool("no features to select from")
    max_features = len(groups) if max_features is None else max_features
    if not 1 <= max_features <= len(groups):
        raise ValueError(f"max_features must lie in [1, {len(groups)}]")
    evaluate = _Evaluator(train, criterion, learner_cfg, test)
    baseline_value, baseline_wall = evaluate(groups)
    subset, steps, stop, rejected = _greedy(evaluate, groups, max_features, baseline_wall)
    trace = SelectionTrace(steps, subset, stop, baseline_value, baseline_wall, str(criterion),
                           rejected)
    return subset, trace


@dataclass
class SweepRow:
    count: int
    features: list
    error_pct: float
    wall_s: float
    relative_time: float


def sweep_feature_counts(train: Dataset, test: Dataset, learner_cfg: TrainConfig, counts,
                         criterion: SelectionCriterion = None) -> list:
    """Test error and relative training time of the greedy prefix of every size in ``counts``.

    The greedy order comes from running best-first selection without its stop
    rule; each prefix is then refit on the whole training set and scored on
    ``test``.
    """
    counts = list(counts)
    groups = train.schema.groups()
    if not groups:
        raise EmptyFeaturePool("no features to select from")
    if counts != sorted(counts) or not counts or counts[0] < 1 or counts[-1] > len(groups):
        raise ValueError(f"counts must be ascending within [1, {len(groups)}]")
    criterion = criterion or SelectionCriterion()
    train_b, test_b = _as_binary(train), _as_binary(test)

    full = _Evaluator(train_b, SelectionCriterion("overall_error", split="test"), learner_cfg, test_b)
    baseline_error, baseline_wall = full(groups)

    selector = _Evaluator(train_b, criterion, learner_cfg, test_b)
    order, _, _, _ = _greedy(selector, groups, counts[-1], baseline_wall, stop_rule=False)

    rows = []
    for k in counts:
        prefix = order[:k]
        if k == len(groups):
            error, wall = baseline_error, baseline_wall
        else:
            error, wall = full(prefix)
        rel = 1.0 if k == len(groups) else (min(1.0, wall / baseline_wall) if baseline_wall > 0 else 1.0)
        rows.append(SweepRow(k, prefix, error, wall, rel))
    return rows


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["count", "error_pct", "wall_s", "relative_time", "features"])
    for r in rows:
        writer.writerow([r.count, r.error_pct, r.wall_s, r.relative_time, " ".join(r.features)])
    return buf.getvalue()
