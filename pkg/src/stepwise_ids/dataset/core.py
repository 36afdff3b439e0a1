"""Columnar flow-record datasets and the operations that build them."""

from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from ..errors import (
    AllFeaturesConstant,
    AllRecordsExcluded,
    BadNumeric,
    EmptyFile,
    MissingColumn,
    NotEncoded,
    SchemaError,
)
from .labels import ALL_LABELS, AttackLabel, parse_label
from .schema import CATEGORICAL, NUMERIC, FeatureSchema

log = logging.getLogger(__name__)

POSITIVE = 1
NEGATIVE = 0


class Record(NamedTuple):
    values: tuple
    label: object  # AttackLabel, or POSITIVE/NEGATIVE for binary datasets


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable column store.

    ``columns[i]`` holds feature ``schema.features[i]``: float64 for numeric
    features, an object array of strings for categorical ones.  ``labels`` are
    AttackLabel codes, or 0/1 once the dataset has been made binary; in that case
    ``original_labels`` keeps the AttackLabel codes.
    """

    schema: FeatureSchema
    columns: tuple
    labels: np.ndarray
    provenance: str = ""
    binary: bool = False
    original_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if len(self.columns) != self.schema.width:
            raise SchemaError(
                f"{len(self.columns)} columns for a schema of {self.schema.width} features"
            )
        n = len(self.labels)
        for feature, col in zip(self.schema.features, self.columns):
            if len(col) != n:
                raise SchemaError(f"column {feature.name!r} has {len(col)} rows, expected {n}")

    def __len__(self):
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.schema.width

    @cached_property
    def X(self) -> np.ndarray:
        """Dense float matrix; only defined once every feature is numeric."""
        if not self.schema.all_numeric:
            raise NotEncoded("dataset has categorical features; apply an encoding first")
        if not self.columns:
            return np.empty((len(self), 0))
        return np.ascontiguousarray(np.column_stack(self.columns), dtype=np.float64)

    @property
    def attack_labels(self) -> np.ndarray:
        """AttackLabel codes, whether or not the dataset is binary."""
        return self.original_labels if self.binary else self.labels

    def label_set(self) -> set:
        return {AttackLabel.from_code(c) for c in np.unique(self.attack_labels)}

    def record(self, i: int) -> Record:
        values = tuple(col[i].item() if isinstance(col[i], np.generic) else col[i] for col in self.columns)
        label = int(self.labels[i]) if self.binary else AttackLabel.from_code(self.labels[i])
        return Record(values, label)

    def records(self):
        return [self.record(i) for i in range(len(self))]

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return replace(
            self,
            columns=tuple(col[rows] for col in self.columns),
            labels=self.labels[rows],
            original_labels=None if self.original_labels is None else self.original_labels[rows],
        )

    def select_columns(self, indices) -> "Dataset":
        indices = list(indices)
        features = [self.schema.features[i] for i in indices]
        return replace(
            self,
            schema=self.schema.replace_features(features),
            columns=tuple(self.columns[i] for i in indices),
        )

    def select_features(self, groups) -> "Dataset":
        """Keep the columns of the named (source) features, in schema order."""
        return self.select_columns(self.schema.columns_for(groups))

    def with_labels(self, labels, binary, original_labels=None) -> "Dataset":
        return replace(self, labels=np.asarray(labels, dtype=np.int8), binary=binary,
                       original_labels=original_labels)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.schema.fingerprint().encode())
        for col in self.columns:
            if col.dtype == object:
                h.update("\x1f".join(map(str, col)).encode())
            else:
                h.update(np.ascontiguousarray(col, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.labels, dtype=np.int8).tobytes())
        if self.original_labels is not None:
            h.update(np.ascontiguousarray(self.original_labels, dtype=np.int8).tobytes())
        return h.hexdigest()

    def equals(self, other: "Dataset") -> bool:
        if self.schema != other.schema or self.binary != other.binary:
            return False
        if not np.array_equal(self.labels, other.labels):
            return False
        for a, b in zip(self.columns, other.columns):
            if a.dtype == object or b.dtype == object:
                if list(a) != list(b):
                    return False
            elif not np.array_equal(a, b):
                return False
        return True


def from_records(schema: FeatureSchema, records, provenance="") -> Dataset:
    """Build a dataset from (values, label) rows; mainly for tests and small fixtures."""
    records = list(records)
    columns = []
    for j, feature in enumerate(schema.features):
        raw = [r[0][j] for r in records]
        if feature.kind == NUMERIC:
            columns.append(np.asarray(raw, dtype=np.float64))
        else:
            columns.append(np.asarray([str(v) for v in raw], dtype=object))
    labels = np.asarray([parse_label(r[1]).code for r in records], dtype=np.int8)
    return Dataset(schema, tuple(columns), labels, provenance)


def _parse_numeric(tokens) -> np.ndarray:
    """Correctly rounded float parsing; unparseable or empty cells become NaN."""
    try:
        return tokens.astype(np.float64)
    except ValueError:
        pass
    out = np.empty(len(tokens), dtype=np.float64)
    for i, token in enumerate(tokens):
        try:
            out[i] = float(token)
        except ValueError:
            out[i] = np.nan
    return out


def load_csv(path, schema: FeatureSchema, skip_bad_rows=False) -> Dataset:
    """Read a comma-separated flow file with a header row.

    Numeric cells must parse as finite floats; a bad cell raises ``BadNumeric``
    unless ``skip_bad_rows`` is set, in which case the row is dropped with a
    warning.  Rows are numbered from 1 (first data row).
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyFile(f"{path}: empty file") from None
    frame.columns = [c.strip() for c in frame.columns]
    for name in schema.names + [schema.label_column]:
        if name not in frame.columns:
            raise MissingColumn(name)
    if len(frame) == 0:
        raise EmptyFile(f"{path}: no data rows")

    n = len(frame)
    bad = np.zeros(n, dtype=bool)
    numeric = {}
    for feature in schema.features:
        if feature.kind != NUMERIC:
            continue
        raw = frame[feature.name]
        values = _parse_numeric(raw.to_numpy(dtype=object))
        invalid = ~np.isfinite(values)
        if invalid.any():
            if not skip_bad_rows:
                row = int(np.flatnonzero(invalid)[0])
                raise BadNumeric(row + 1, feature.name, raw.iloc[row])
            bad |= invalid
        numeric[feature.name] = values

    tokens = frame[schema.label_column].to_numpy()
    lookup = {}
    labels = np.empty(n, dtype=np.int8)
    for i, token in enumerate(tokens):
        code = lookup.get(token)
        if code is None:
            code = lookup[token] = parse_label(token, row=i + 1).code
        labels[i] = code

    columns = []
    for feature in schema.features:
        if feature.kind == NUMERIC:
            columns.append(numeric[feature.name])
        else:
            columns.append(frame[feature.name].str.strip().to_numpy(dtype=object))
    dataset = Dataset(schema, tuple(columns), labels, str(path))
    if bad.any():
        log.warning("%s: rejected %d rows with missing or non-numeric values", path, int(bad.sum()))
        keep = np.flatnonzero(~bad)
        if keep.size == 0:
            raise EmptyFile(f"{path}: every row was rejected")
        dataset = dataset.take(keep)
    return dataset


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(d: Dataset, path) -> None:
    """Write a multiclass dataset back to CSV with round-trip float formatting."""
    if d.binary:
        raise SchemaError("write_csv expects AttackLabel labels, not a binary relabelling")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(d.schema.names + [d.schema.label_column])
        label_names = [label.value for label in ALL_LABELS]
        for i in range(len(d)):
            row = [_format_value(col[i].item() if isinstance(col[i], np.generic) else col[i])
                   for col in d.columns]
            row.append(label_names[d.labels[i]])
            writer.writerow(row)


def filter_labels(d: Dataset, excluded) -> Dataset:
    """Drop every record whose attack label is in ``excluded``, preserving order."""
    excluded = {parse_label(x) for x in excluded}
    if not excluded:
        return d
    codes = np.array([label.code for label in excluded], dtype=np.int8)
    keep = ~np.isin(d.attack_labels, codes)
    if not keep.any():
        raise AllRecordsExcluded(f"no records left after excluding {sorted(map(str, excluded))}")
    if keep.all():
        return d
    return d.take(np.flatnonzero(keep))


def restrict_labels(d: Dataset, included) -> Dataset:
    """Keep only records whose attack label is in ``included``."""
    codes = np.array([parse_label(x).code for x in included], dtype=np.int8)
    return d.take(np.flatnonzero(np.isin(d.attack_labels, codes)))


@dataclass(frozen=True)
class ClassStats:
    counts: dict
    total: int

    @property
    def percentages(self) -> dict:
        return {label: 100 * count / self.total for label, count in self.counts.items()}

    def to_dict(self) -> dict:
        pct = self.percentages
        return {
            "total": self.total,
            "classes": {
                str(label): {"count": self.counts[label], "percent": round(pct[label], 2)}
                for label in self.counts
            },
        }

    def to_text(self, title="") -> str:
        lines = [title] if title else []
        lines.append(f"{'Traffic Type':<16}{'Count':>10}{'Percent':>10}")
        for label, pct in self.percentages.items():
            lines.append(f"{label.value:<16}{self.counts[label]:>10d}{pct:>9.2f}%")
        lines.append(f"{'Total':<16}{self.total:>10d}")
        return "\n".join(lines)


def class_stats(d: Dataset) -> ClassStats:
    counts = np.bincount(d.attack_labels.astype(np.int64), minlength=len(ALL_LABELS))
    present = {label: int(counts[label.code]) for label in ALL_LABELS if counts[label.code]}
    return ClassStats(present, int(counts.sum()))


def relabel_binary(d: Dataset, positives) -> Dataset:
    """Mark records of the ``positives`` labels 1 and everything else 0.

    The AttackLabel codes survive in ``original_labels``.
    """
    positives = {parse_label(x) for x in positives}
    if not positives:
        raise ValueError("positives must be non-empty")
    original = d.attack_labels
    codes = np.array([label.code for label in positives], dtype=np.int8)
    binary = np.isin(original, codes).astype(np.int8)
    return d.with_labels(binary, binary=True, original_labels=original)


def _n_distinct(col) -> int:
    if col.dtype == object:
        return len(set(col))
    return len(np.unique(col))


def drop_constant_features(d: Dataset):
    """Remove features that take a single value over all records of ``d``."""
    keep, dropped = [], []
    for i, (feature, col) in enumerate(zip(d.schema.features, d.columns)):
        if _n_distinct(col) <= 1:
            dropped.append(feature.name)
        else:
            keep.append(i)
    if not keep:
        raise AllFeaturesConstant("every feature is constant")
    if not dropped:
        return d, []
    return d.select_columns(keep), dropped


__all__ = [
    "CATEGORICAL",
    "NUMERIC",
    "NEGATIVE",
    "POSITIVE",
    "ClassStats",
    "Dataset",
    "Record",
    "class_stats",
    "drop_constant_features",
    "filter_labels",
    "from_records",
    "load_csv",
    "relabel_binary",
    "restrict_labels",
    "write_csv",
]
