"""Feature schemas and the sidecar schema-file format.

A schema file has one ``name,kind`` line per column.  ``kind`` is one of
``numeric``, ``categorical``, ``label``, ``id`` or ``ignore``; ``#`` starts a
comment.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import EmptyFile, MissingColumn, SchemaError

NUMERIC = "numeric"
CATEGORICAL = "categorical"
FEATURE_KINDS = (NUMERIC, CATEGORICAL)


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str = NUMERIC
    # For encoded columns: the raw feature this column was expanded from.
    source: Optional[str] = None

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")

    @property
    def group(self) -> str:
        return self.source if self.source is not None else self.name


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple
    label_column: str = "attack_cat"
    id_column: Optional[str] = None
    ignored: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "ignored", tuple(self.ignored))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate feature names: {dupes}")
        if not any(f.kind == NUMERIC for f in self.features):
            raise SchemaError("schema needs at least one numeric feature")
        if self.label_column in names:
            raise SchemaError(f"label column {self.label_column!r} listed as a feature")

    @property
    def names(self) -> list:
        return [f.name for f in self.features]

    @property
    def width(self) -> int:
        return len(self.features)

    @property
    def all_numeric(self) -> bool:
        return all(f.kind == NUMERIC for f in self.features)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown feature {name!r}") from None

    def groups(self) -> list:
        """Source-feature names in first-appearance order."""
        seen = {}
        for f in self.features:
            seen.setdefault(f.group, None)
        return list(seen)

    def group_columns(self) -> dict:
        cols = {}
        for i, f in enumerate(self.features):
            cols.setdefault(f.group, []).append(i)
        return cols

    def columns_for(self, groups) -> list:
        """Encoded column indices (ascending) covering the given source features."""
        mapping = self.group_columns()
        out = []
        for g in groups:
            if g not in mapping:
                raise SchemaError(f"unknown feature {g!r}")
            out.extend(mapping[g])
        return sorted(out)

    def replace_features(self, features) -> "FeatureSchema":
        return FeatureSchema(tuple(features), self.label_column, self.id_column, self.ignored)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for f in self.features:
            h.update(f"{f.name}\x1f{f.kind}\x1f{f.source or ''}\x1e".encode())
        return h.hexdigest()[:16]


def parse_schema_lines(lines) -> FeatureSchema:
    features, ignored = [], []
    label_column, id_column = None, None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2 or not parts[0]:
            raise SchemaError(f"schema line {lineno}: expected 'name,kind', got {raw.strip()!r}")
        name, kind = parts[0], parts[1].lower()
        if kind in FEATURE_KINDS:
            features.append(Feature(name, kind))
        elif kind == "label":
            label_column = name
        elif kind == "id":
            id_column = name
        elif kind == "ignore":
            ignored.append(name)
        else:
            raise SchemaError(f"schema line {lineno}: unknown kind {kind!r}")
    if label_column is None:
        label_column = "attack_cat"
    return FeatureSchema(tuple(features), label_column, id_column, tuple(ignored))


def read_schema(path) -> FeatureSchema:
    with open(path, encoding="utf-8") as fh:
        return parse_schema_lines(fh)


def format_schema(schema: FeatureSchema) -> str:
    lines = []
    if schema.id_column:
        lines.append(f"{schema.id_column},id")
    lines.extend(f"{f.name},{f.kind}" for f in schema.features)
    lines.extend(f"{name},ignore" for name in schema.ignored)
    lines.append(f"{schema.label_column},label")
    return "\n".join(lines) + "\n"


def write_schema(schema: FeatureSchema, path) -> None:
    Path(path).write_text(format_schema(schema), encoding="utf-8")


def _is_float(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def infer_schema(path, label_column="attack_cat", id_column="id", ignore=("label",)) -> FeatureSchema:
    """Infer kinds from a CSV: a column is numeric if every non-empty value parses as a float."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyFile(f"{path}: empty file") from None
        numeric = [True] * len(header)
        for row in reader:
            for i, token in enumerate(row[: len(header)]):
                if numeric[i] and token.strip() and not _is_float(token):
                    numeric[i] = False
    if label_column not in header:
        raise MissingColumn(label_column)
    features, ignored = [], []
    for name, is_num in zip(header, numeric):
        if name == label_column or name == id_column:
            continue
        if name in ignore:
            ignored.append(name)
            continue
        features.append(Feature(name, NUMERIC if is_num else CATEGORICAL))
    return FeatureSchema(
        tuple(features), label_column, id_column if id_column in header else None, tuple(ignored)
    )


_UNSW_CATEGORICAL = ("proto", "service", "state")
_UNSW_NUMERIC = (
    "dur", "spkts", "dpkts", "sbytes", "dbytes", "rate", "sttl", "dttl", "sload",
    "dload", "sloss", "dloss", "sinpkt", "dinpkt", "sjit", "djit", "swin", "stcpb",
    "dtcpb", "dwin", "tcprtt", "synack", "ackdat", "smean", "dmean", "trans_depth",
    "response_body_len", "ct_srv_src", "ct_state_ttl", "ct_dst_ltm", "ct_src_dport_ltm",
    "ct_dst_sport_ltm", "ct_dst_src_ltm", "is_ftp_login", "ct_ftp_cmd",
    "ct_flw_http_mthd", "ct_src_ltm", "ct_srv_dst", "is_sm_ips_ports",
)


def unsw_nb15_schema() -> FeatureSchema:
    """Schema of the published UNSW-NB15 training/testing CSVs.

    The binary ``label`` column duplicates ``attack_cat`` and is ignored so it
    cannot leak into the features.
    """
    features = [Feature("dur")]
    features += [Feature(name, CATEGORICAL) for name in _UNSW_CATEGORICAL]
    features += [Feature(name) for name in _UNSW_NUMERIC[1:]]
    return FeatureSchema(tuple(features), "attack_cat", "id", ("label",))
