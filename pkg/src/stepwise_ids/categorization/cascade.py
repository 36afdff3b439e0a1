"""Step-wise cascade categorizer: one binary model per stage, records routed down a tree."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..dataset.core import Dataset, drop_constant_features, relabel_binary, restrict_labels
from ..dataset.labels import AttackLabel
from ..errors import StageEmpty
from ..learners import TrainConfig
from ..learners import train as train_model
from ..learners.base import check_width
from ..metrics import BinaryConfusion, MulticlassConfusion, _pct
from ..seeding import derive_seed
from .report import CategorizationReport, StageMetrics
from .stages import Routing, StageSpec, resolve_routing

log = logging.getLogger(__name__)


@dataclass
class FittedStage:
    spec: StageSpec
    model: object
    columns: np.ndarray  # indices into the encoded input columns
    dropped: list = field(default_factory=list)  # constant columns removed before training


@dataclass
class RouteTrace:
    """Per-stage record indices seen during routing, for evaluation and invariant checks."""

    entered: dict = field(default_factory=dict)  # stage id -> row indices
    positive: dict = field(default_factory=dict)  # stage id -> row indices predicted Positive


@dataclass
class CascadeModel:
    stages: list
    routing: Routing
    n_features: int
    schema_fingerprint: str = ""

    @property
    def stage_ids(self) -> list:
        return [s.spec.stage_id for s in self.stages]

    def stage(self, stage_id: str) -> FittedStage:
        for s in self.stages:
            if s.spec.stage_id == stage_id:
                return s
        raise KeyError(stage_id)

    @property
    def labels(self) -> tuple:
        """Labels in scope, in taxonomy order."""
        return tuple(sorted(self.stages[0].spec.population))

    def route(self, X) -> tuple:
        """Label codes for every row of ``X`` and the routing trace."""
        X = check_width(self, X)
        out = np.full(X.shape[0], -1, dtype=np.int8)
        trace = RouteTrace()
        pending = [(self.routing.root, np.arange(X.shape[0]))]
        while pending:
            sid, rows = pending.pop()
            stage = self.stage(sid)
            trace.entered[sid] = rows
            if rows.size:
                flags = stage.model.predict(X[np.ix_(rows, stage.columns)]).astype(bool)
            else:
                flags = np.zeros(0, dtype=bool)
            trace.positive[sid] = rows[flags]
            for branch, sub in ((self.routing.on_positive[sid], rows[flags]),
                                (self.routing.on_negative[sid], rows[~flags])):
                if isinstance(branch, AttackLabel):
                    out[sub] = branch.code
                else:
                    pending.append((branch, sub))
        return out, trace

    def predict(self, X) -> np.ndarray:
        return self.route(X)[0]


def cascade_predict(m: CascadeModel, record) -> AttackLabel:
    """Label of a single encoded record (a sequence of floats)."""
    values = np.asarray(getattr(record, "values", record), dtype=np.float64).reshape(1, -1)
    return AttackLabel.from_code(int(m.predict(values)[0]))


def _stage_columns(train: Dataset, spec: StageSpec, features) -> np.ndarray:
    groups = spec.features if spec.features is not None else features
    if groups is None:
        return np.arange(train.n_features)
    return np.asarray(train.schema.columns_for(groups), dtype=np.int64)


def _fit_stage(train: Dataset, spec: StageSpec, cfg: TrainConfig, features) -> FittedStage:
    present = train.label_set() & spec.population
    if not present:
        raise StageEmpty(f"stage {spec.stage_id}: no training records")
    if not present & spec.positives or not present - spec.positives:
        log.warning("stage %s trains on one class only (%s)", spec.stage_id,
                    ", ".join(str(l) for l in sorted(present)))
    sub = restrict_labels(train, spec.population)
    columns = _stage_columns(train, spec, features)
    sub = sub.select_columns(columns)
    dropped = []
    if spec.drop_constant:
        names = sub.schema.names
        sub, dropped = drop_constant_features(sub)
        keep = [i for i, n in enumerate(names) if n not in set(dropped)]
        columns = columns[keep]
    sub = relabel_binary(sub, spec.positives)
    model = train_model(sub, cfg.with_seed(derive_seed(cfg.seed, "stage", spec.stage_id)))
    return FittedStage(spec, model, columns, dropped)


def train_cascade(train_set: Dataset, specs, cfg: TrainConfig = None, features=None,
                  threads: int = 1) -> CascadeModel:
    """Fit every stage on its own training population.

    ``features`` is the cascade-wide source-feature subset (None: all); a stage
    with its own ``features`` uses those instead.  Stage populations depend
    only on labels, so stages may be fitted concurrently without changing any
    result.
    """
    cfg = cfg or TrainConfig()
    specs = list(specs)
    routing = resolve_routing(specs)
    if threads > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stages = list(pool.map(lambda s: _fit_stage(train_set, s, cfg, features), specs))
    else:
        stages = [_fit_stage(train_set, s, cfg, features) for s in specs]
    return CascadeModel(stages, routing, train_set.n_features, train_set.schema.fingerprint())


def _stage_metrics(spec: StageSpec, entered, positive, truth, supports) -> StageMetrics:
    codes = np.array([l.code for l in spec.positives], dtype=np.int8)
    y_true = np.isin(truth[entered], codes)
    y_pred = np.isin(entered, positive)
    c = BinaryConfusion.from_predictions(y_true, y_pred)
    in_pop = np.isin(truth[entered], np.array([l.code for l in spec.population], dtype=np.int8))
    negatives = ~y_true
    inside = negatives & in_pop  # true stage negatives, as opposed to misrouted records
    support = sum(supports.get(l, 0) for l in spec.positives)
    return StageMetrics(
        stage_id=spec.stage_id,
        positives=[str(l) for l in sorted(spec.positives)],
        reached=int(entered.size),
        positive_reached=int(y_true.sum()),
        und_pct=_pct(c.fn, c.fn + c.tp) if c.fn + c.tp else None,
        misclassified_in_pct=_pct(int(np.sum(y_pred & negatives)), int(negatives.sum()))
        if negatives.any() else None,
        far_pct=_pct(int(np.sum(y_pred & inside)), int(inside.sum())) if inside.any() else None,
        overall_error_pct=_pct(c.fp + c.fn, c.total) if c.total else None,
        positive_support=support,
        und_full_pct=_pct(support - c.tp, support) if support else None,
    )


def evaluate_cascade(m: CascadeModel, test: Dataset) -> CategorizationReport:
    """Multiclass confusion over the cascade's labels plus per-stage binary metrics.

    Stage metrics are computed on the test records that reached the stage;
    ``und_full_pct`` additionally charges the stage with positives lost earlier.
    """
    truth = test.attack_labels
    pred, trace = m.route(test.X)
    confusion = MulticlassConfusion.from_predictions(truth, pred, m.labels)
    supports = confusion.support()
    stages = [_stage_metrics(s.spec, trace.entered[s.spec.stage_id], trace.positive[s.spec.stage_id],
                             truth, supports) for s in m.stages]
    return CategorizationReport("step-wise", confusion, stages)


__all__ = [
    "CascadeModel",
    "FittedStage",
    "RouteTrace",
    "cascade_predict",
    "evaluate_cascade",
    "train_cascade",
]
