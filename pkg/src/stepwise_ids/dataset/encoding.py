"""One-hot expansion of categorical features and numeric standardization."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from ..errors import SchemaMismatch
from .core import Dataset
from .schema import CATEGORICAL, NUMERIC, Feature, FeatureSchema

OTHER = "<other>"


def onehot_name(feature: str, category: str) -> str:
    return f"{feature}={category}"


@dataclass(frozen=True)
class EncodingMap:
    """Training-set statistics needed to encode any dataset of the same schema."""

    source: FeatureSchema
    categories: dict  # feature name -> tuple of retained categories
    means: dict  # numeric feature name -> training mean
    stds: dict  # numeric feature name -> training stddev (0 stored as 1)

    @property
    def width(self) -> int:
        return sum(len(self.categories[f.name]) + 1 if f.kind == CATEGORICAL else 1
                   for f in self.source.features)

    def encoded_schema(self) -> FeatureSchema:
        features = []
        for f in self.source.features:
            if f.kind == NUMERIC:
                features.append(Feature(f.name, NUMERIC))
            else:
                for cat in self.categories[f.name]:
                    features.append(Feature(onehot_name(f.name, cat), NUMERIC, source=f.name))
                features.append(Feature(onehot_name(f.name, OTHER), NUMERIC, source=f.name))
        return self.source.replace_features(features)

    def to_dict(self) -> dict:
        return {
            "features": [[f.name, f.kind] for f in self.source.features],
            "label_column": self.source.label_column,
            "id_column": self.source.id_column,
            "ignored": list(self.source.ignored),
            "categories": {k: list(v) for k, v in self.categories.items()},
            "means": self.means,
            "stds": self.stds,
        }

    @classmethod
    def from_dict(cls, data) -> "EncodingMap":
        schema = FeatureSchema(
            tuple(Feature(name, kind) for name, kind in data["features"]),
            data["label_column"],
            data.get("id_column"),
            tuple(data.get("ignored", ())),
        )
        return cls(
            schema,
            {k: tuple(v) for k, v in data["categories"].items()},
            {k: float(v) for k, v in data["means"].items()},
            {k: float(v) for k, v in data["stds"].items()},
        )


def fit_encoding(train: Dataset, max_categories: int = 32) -> EncodingMap:
    """Collect category vocabularies and numeric moments from the training data.

    Each categorical feature keeps its ``max_categories`` most frequent values
    (ties broken lexicographically); the rest share an "other" column.
    """
    if max_categories < 1:
        raise ValueError("max_categories must be >= 1")
    if len(train) == 0:
        raise ValueError("cannot fit an encoding on an empty dataset")
    categories, means, stds = {}, {}, {}
    for f, col in zip(train.schema.features, train.columns):
        if f.kind == CATEGORICAL:
            freq = Counter(col)
            ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
            categories[f.name] = tuple(cat for cat, _ in ranked[:max_categories])
        else:
            mean = float(np.mean(col))
            std = float(np.std(col))
            means[f.name] = mean
            stds[f.name] = std if std > 0 else 1.0
    return EncodingMap(train.schema, categories, means, stds)


def _same_source(schema: FeatureSchema, source: FeatureSchema) -> bool:
    return [(f.name, f.kind) for f in schema.features] == [(f.name, f.kind) for f in source.features]


def apply_encoding(d: Dataset, e: EncodingMap, standardize: bool = False) -> Dataset:
    """Expand categoricals to 0/1 columns; optionally z-score numerics with training stats."""
    if not _same_source(d.schema, e.source):
        raise SchemaMismatch("dataset schema does not match the encoding's source schema")
    columns = []
    for f, col in zip(d.schema.features, d.columns):
        if f.kind == NUMERIC:
            if standardize:
                columns.append((col - e.means[f.name]) / e.stds[f.name])
            else:
                columns.append(col)
            continue
        cats = e.categories[f.name]
        index = {cat: i for i, cat in enumerate(cats)}
        other = len(cats)
        slot = np.fromiter((index.get(v, other) for v in col), dtype=np.int64, count=len(col))
        block = np.zeros((len(cats) + 1, len(col)), dtype=np.float64)
        block[slot, np.arange(len(col))] = 1.0
        columns.extend(block)
    return replace(d, schema=e.encoded_schema(), columns=tuple(columns))
