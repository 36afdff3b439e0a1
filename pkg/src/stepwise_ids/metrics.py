"""Detection metrics (FAR, UND, overall error/accuracy) and confusion tallies.

Every percentage is computed as ``100 * count / total`` from exact integer
counts: a single rounding step, which keeps error + accuracy == 100 exactly.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset.labels import ALL_LABELS, REPORT_ORDER, parse_label
from .errors import EmptyEvaluation, NoNegatives, NoPositives, NoSourceRecords

log = logging.getLogger(__name__)


def _pct(count: int, total: int) -> float:
    return 100 * int(count) / int(total)


@dataclass(frozen=True)
class BinaryConfusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "BinaryConfusion":
        y_true = np.asarray(y_true).astype(bool)
        y_pred = np.asarray(y_pred).astype(bool)
        return cls(
            tp=int(np.sum(y_true & y_pred)),
            fp=int(np.sum(~y_true & y_pred)),
            tn=int(np.sum(~y_true & ~y_pred)),
            fn=int(np.sum(y_true & ~y_pred)),
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "BinaryConfusion") -> "BinaryConfusion":
        return BinaryConfusion(self.tp + other.tp, self.fp + other.fp,
                               self.tn + other.tn, self.fn + other.fn)

    def swapped(self) -> "BinaryConfusion":
        """The same tallies with the Positive/Negative convention reversed."""
        return BinaryConfusion(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


def far(c: BinaryConfusion) -> float:
    """Percent of normal (negative) traffic flagged anomalous."""
    if c.tn + c.fp == 0:
        raise NoNegatives("FAR needs at least one negative record")
    return _pct(c.fp, c.tn + c.fp)


def und(c: BinaryConfusion) -> float:
    """Percent of anomalous (positive) traffic that went undetected."""
    if c.fn + c.tp == 0:
        raise NoPositives("UND needs at least one positive record")
    return _pct(c.fn, c.fn + c.tp)


def overall_error(c: BinaryConfusion) -> float:
    if c.total == 0:
        raise EmptyEvaluation("no records evaluated")
    return _pct(c.fp + c.fn, c.total)


def overall_accuracy(c: BinaryConfusion) -> float:
    if c.total == 0:
        raise EmptyEvaluation("no records evaluated")
    return _pct(c.tp + c.tn, c.total)


@dataclass(frozen=True)
class MulticlassConfusion:
    """``counts[i, j]``: records of true label ``labels[i]`` predicted as ``labels[j]``."""

    labels: tuple
    counts: np.ndarray

    @classmethod
    def from_predictions(cls, y_true, y_pred, labels=ALL_LABELS) -> "MulticlassConfusion":
        labels = tuple(labels)
        index = np.full(len(ALL_LABELS), -1, dtype=np.int64)
        for i, label in enumerate(labels):
            index[label.code] = i
        t = index[np.asarray(y_true, dtype=np.int64)]
        p = index[np.asarray(y_pred, dtype=np.int64)]
        if (t < 0).any() or (p < 0).any():
            raise ValueError("labels outside the confusion taxonomy")
        k = len(labels)
        counts = np.bincount(t * k + p, minlength=k * k).reshape(k, k)
        return cls(labels, counts)

    def __add__(self, other: "MulticlassConfusion") -> "MulticlassConfusion":
        if self.labels != other.labels:
            raise ValueError("cannot merge confusions over different taxonomies")
        return MulticlassConfusion(self.labels, self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def support(self) -> dict:
        return {label: int(n) for label, n in zip(self.labels, self.counts.sum(axis=1))}

    def to_dict(self) -> dict:
        return {"labels": [str(l) for l in self.labels], "counts": self.counts.tolist()}

    @classmethod
    def from_dict(cls, data) -> "MulticlassConfusion":
        return cls(tuple(parse_label(l) for l in data["labels"]),
                   np.asarray(data["counts"], dtype=np.int64))


def per_class_accuracy(m: MulticlassConfusion) -> dict:
    """Diagonal over row sum, in percent; classes without support are left out."""
    out = {}
    for i, label in enumerate(m.labels):
        support = int(m.counts[i].sum())
        if support == 0:
            log.debug("no test support for %s; omitted from per-class accuracy", label)
            continue
        out[label] = _pct(m.counts[i, i], support)
    return out


def micro_accuracy(m: MulticlassConfusion) -> float:
    if m.total == 0:
        raise EmptyEvaluation("no records evaluated")
    return _pct(np.trace(m.counts), m.total)


def cross_misclassification(models: dict, d, source_attack, threshold=0.5) -> dict:
    """Percent of ``source_attack`` records in ``d`` that each binary model flags positive.

    ``models`` maps an attack label to a model fitted on the encoded columns of ``d``.
    """
    source_attack = parse_label(source_attack)
    rows = np.flatnonzero(d.attack_labels == source_attack.code)
    if rows.size == 0:
        raise NoSourceRecords(f"no {source_attack} records to probe")
    X = d.X[rows]
    return {
        label: _pct(int(model.predict(X, threshold).sum()), rows.size)
        for label, model in models.items()
    }


def _fmt(value) -> str:
    return f"{'n/a':>9}" if value is None else f"{value:>8.2f}%"


@dataclass
class MetricsReport:
    far: float
    und: float
    overall_error: float
    overall_accuracy: float
    confusion: BinaryConfusion
    per_class_accuracy: dict = field(default_factory=dict)
    support: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "far_pct": self.far,
            "und_pct": self.und,
            "overall_error_pct": self.overall_error,
            "overall_accuracy_pct": self.overall_accuracy,
            "confusion": vars(self.confusion).copy(),
            "per_class_accuracy_pct": {str(k): v for k, v in self.per_class_accuracy.items()},
            "support": {str(k): v for k, v in self.support.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self, title="Anomaly detection") -> str:
        lines = [title, f"{'Overall error':<20}{self.overall_error:>8.2f}%",
                 f"{'Overall accuracy':<20}{self.overall_accuracy:>8.2f}%",
                 f"{'FAR':<20}{_fmt(self.far)}", f"{'UND':<20}{_fmt(self.und)}"]
        if self.per_class_accuracy:
            lines.append("")
            lines.append(f"{'Traffic Type':<16}{'Support':>9}{'Accuracy':>10}")
            for label in REPORT_ORDER:
                if label in self.per_class_accuracy:
                    lines.append(f"{label.value:<16}{self.support[label]:>9d}"
                                 f"{self.per_class_accuracy[label]:>9.2f}%")
        return "\n".join(lines)


def binary_report(y_true, y_pred, attack_labels=None, positives=None) -> MetricsReport:
    """Detection metrics; with ``attack_labels`` also the per-class detection accuracy.

    A class in ``positives`` (default: every attack) counts as correct when
    predicted positive, any other class when predicted negative.  FAR or UND
    is None when the evaluation has no negatives or no positives.
    """
    c = BinaryConfusion.from_predictions(y_true, y_pred)
    report = MetricsReport(
        far=far(c) if c.tn + c.fp else None,
        und=und(c) if c.tp + c.fn else None,
        overall_error=overall_error(c),
        overall_accuracy=overall_accuracy(c),
        confusion=c,
    )
    if attack_labels is not None:
        positives = {l for l in ALL_LABELS if l.is_attack} if positives is None else set(positives)
        attack_labels = np.asarray(attack_labels)
        y_pred = np.asarray(y_pred).astype(bool)
        for label in ALL_LABELS:
            rows = attack_labels == label.code
            n = int(rows.sum())
            if not n:
                continue
            hits = int(np.sum(y_pred[rows] if label in positives else ~y_pred[rows]))
            report.per_class_accuracy[label] = _pct(hits, n)
            report.support[label] = n
    return report
