"""Glue between the data, learner and categorization layers used by the CLI."""

from __future__ import annotations

import csv
import logging
import time
from contextlib import contextmanager
from typing import Optional

from .dataset import (
    EXCLUDED_BY_DEFAULT,
    Dataset,
    apply_encoding,
    filter_labels,
    fit_encoding,
    infer_schema,
    load_csv,
    read_schema,
    unsw_nb15_schema,
)
from .dataset.core import relabel_binary
from .dataset.labels import ATTACK_LABELS
from .errors import MissingColumn
from .learners import TrainConfig, train
from .metrics import binary_report

log = logging.getLogger(__name__)


def resolve_schema(spec: str, train_path: Optional[str], label_column: str = "attack_cat"):
    """``unsw``, ``auto`` (UNSW-NB15 when the header matches, else inferred) or a schema file."""
    if spec == "unsw":
        return unsw_nb15_schema()
    if spec == "auto":
        if train_path is None:
            raise ValueError("--schema auto needs --train")
        unsw = unsw_nb15_schema()
        with open(train_path, newline="", encoding="utf-8") as fh:
            header = [h.strip() for h in next(csv.reader(fh), [])]
        if label_column == unsw.label_column and set(unsw.names) <= set(header):
            return unsw
        if label_column not in header:
            raise MissingColumn(label_column)
        return infer_schema(train_path, label_column)
    return read_schema(spec)


def load_split(path, schema, include_fuzzers=False, skip_bad_rows=False) -> Dataset:
    d = load_csv(path, schema, skip_bad_rows=skip_bad_rows)
    if not include_fuzzers:
        d = filter_labels(d, EXCLUDED_BY_DEFAULT)
    return d


def encode_pair(train_set: Dataset, test_set: Optional[Dataset], max_categories=32, standardize=False):
    """Fit the encoding on training data only and apply it to both splits."""
    enc = fit_encoding(train_set, max_categories)
    train_e = apply_encoding(train_set, enc, standardize)
    test_e = None if test_set is None else apply_encoding(test_set, enc, standardize)
    return train_e, test_e, enc


def read_subset(path) -> list:
    """One source-feature name per line; blank lines and ``#`` comments are skipped."""
    with open(path, encoding="utf-8") as fh:
        names = [line.split("#", 1)[0].strip() for line in fh]
    return [n for n in names if n]


def write_subset(names, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{n}\n" for n in names)


def detection(train_e: Dataset, test_e: Dataset, cfg: TrainConfig, features=None):
    """Normal-vs-attack model on ``train_e`` and its metrics on ``test_e``."""
    if features is not None:
        train_e, test_e = train_e.select_features(features), test_e.select_features(features)
    model = train(relabel_binary(train_e, ATTACK_LABELS), cfg)
    test_b = relabel_binary(test_e, ATTACK_LABELS)
    report = binary_report(test_b.labels, model.predict(test_b.X), test_e.attack_labels)
    return model, report


class PhaseTimer:
    """Wall time per named phase, for the run manifest."""

    def __init__(self):
        self.times = {}

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.times[name] = self.times.get(name, 0.0) + time.perf_counter() - start
            log.info("%s: %.2fs", name, self.times[name])
