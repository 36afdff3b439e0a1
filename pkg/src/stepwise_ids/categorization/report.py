"""Categorization reports and the single-type vs step-wise comparison table."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

from ..dataset.labels import REPORT_ORDER, parse_label
from ..errors import TaxonomyMismatch
from ..metrics import MulticlassConfusion, micro_accuracy, per_class_accuracy


@dataclass
class StageMetrics:
    """Binary metrics of one cascade stage or one single-type model on the test set.

    ``reached`` counts the test records the stage actually saw.  UND and
    ``misclassified_in_pct`` (foreign records flagged positive) are computed on
    those records; ``und_full_pct`` uses the whole test support of the positive
    classes, so records lost at earlier stages count as missed.
    """

    stage_id: str
    positives: list
    reached: int
    positive_reached: int
    und_pct: Optional[float] = None
    misclassified_in_pct: Optional[float] = None
    far_pct: Optional[float] = None
    overall_error_pct: Optional[float] = None
    positive_support: Optional[int] = None
    und_full_pct: Optional[float] = None


@dataclass
class CategorizationReport:
    strategy: str
    confusion: MulticlassConfusion
    stages: list = field(default_factory=list)
    checking_order: Optional[list] = None
    # source attack -> model attack -> percent flagged (single-type only)
    cross_misclassification: dict = field(default_factory=dict)

    @property
    def per_class_accuracy(self) -> dict:
        return per_class_accuracy(self.confusion)

    @property
    def overall_accuracy(self) -> float:
        return micro_accuracy(self.confusion)

    @property
    def support(self) -> dict:
        return self.confusion.support()

    def merged_accuracy(self, group) -> float:
        """Percent of ``group`` records predicted as any member of ``group``."""
        labels = self.confusion.labels
        idx = [labels.index(parse_label(l)) for l in group]
        block = self.confusion.counts[idx][:, idx].sum()
        total = self.confusion.counts[idx].sum()
        return 100 * int(block) / int(total)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "overall_accuracy_pct": self.overall_accuracy,
            "per_class_accuracy_pct": {str(k): v for k, v in self.per_class_accuracy.items()},
            "support": {str(k): v for k, v in self.support.items()},
            "confusion": self.confusion.to_dict(),
            "stages": [asdict(s) for s in self.stages],
            "checking_order": self.checking_order,
            "cross_misclassification_pct": self.cross_misclassification,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data) -> "CategorizationReport":
        return cls(
            data["strategy"],
            MulticlassConfusion.from_dict(data["confusion"]),
            [StageMetrics(**s) for s in data.get("stages", [])],
            data.get("checking_order"),
            data.get("cross_misclassification_pct", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "CategorizationReport":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        acc, support = self.per_class_accuracy, self.support
        lines = [f"{self.strategy} categorization"]
        if self.checking_order:
            lines.append("checking order: " + ", ".join(self.checking_order))
        lines.append(f"{'Type of Attack':<16}{'Support':>9}{'Accuracy':>11}")
        for label in _ordered(acc):
            lines.append(f"{label.value:<16}{support[label]:>9d}{acc[label]:>10.2f}%")
        lines.append(f"{'Overall':<16}{self.confusion.total:>9d}{self.overall_accuracy:>10.2f}%")
        if self.stages:
            lines.append("")
            lines.append(f"{'Stage':<16}{'Reached':>9}{'UND':>9}{'Misc.in':>9}{'FAR':>9}"
                         f"{'Error':>9}{'UND(all)':>10}  Positive")
            for s in self.stages:
                lines.append(
                    f"{s.stage_id:<16}{s.reached:>9d}{_cell(s.und_pct)}{_cell(s.misclassified_in_pct)}"
                    f"{_cell(s.far_pct)}{_cell(s.overall_error_pct)}{_cell(s.und_full_pct, 10)}  "
                    + ", ".join(s.positives)
                )
        if self.cross_misclassification:
            lines.append("")
            lines.append("Cross misclassification (rows: source attack, columns: model)")
            models = list(next(iter(self.cross_misclassification.values())))
            lines.append(f"{'':<16}" + "".join(f"{m[:9]:>10}" for m in models))
            for source, row in self.cross_misclassification.items():
                lines.append(f"{source:<16}" + "".join(f"{row[m]:>9.2f}%" for m in models))
        return "\n".join(lines)


def _cell(value, width=9) -> str:
    return f"{'-':>{width}}" if value is None else f"{value:>{width - 1}.2f}%"


def _ordered(labels):
    return [l for l in REPORT_ORDER if l in labels]


@dataclass
class ComparisonRow:
    label: str
    single_pct: Optional[float]
    cascade_pct: Optional[float]

    @property
    def delta(self) -> Optional[float]:
        if self.single_pct is None or self.cascade_pct is None:
            return None
        return self.cascade_pct - self.single_pct


@dataclass
class Comparison:
    rows: list
    overall: ComparisonRow

    def to_dict(self) -> dict:
        def row(r):
            return {"label": r.label, "single_type_pct": r.single_pct,
                    "step_wise_pct": r.cascade_pct, "delta_pct": r.delta}
        return {"rows": [row(r) for r in self.rows], "overall": row(self.overall)}

    def to_text(self) -> str:
        lines = [f"{'Type of Attack':<16}{'Single-Type':>13}{'Step-Wise':>12}{'Delta':>10}"]
        for r in self.rows + [self.overall]:
            delta = "-" if r.delta is None else f"{r.delta:+.2f}"
            lines.append(f"{r.label:<16}{_cell(r.single_pct, 13)}{_cell(r.cascade_pct, 12)}{delta:>10}")
        return "\n".join(lines)


def compare_strategies(single: CategorizationReport, cascade: CategorizationReport) -> Comparison:
    """Per-class and overall accuracy side by side; both reports must cover the same test set."""
    if set(single.confusion.labels) != set(cascade.confusion.labels) or single.support != cascade.support:
        raise TaxonomyMismatch("reports cover different taxonomies or test sets")
    a, b = single.per_class_accuracy, cascade.per_class_accuracy
    rows = [ComparisonRow(l.value, a.get(l), b.get(l)) for l in _ordered(set(a) | set(b))]
    return Comparison(rows, ComparisonRow("Overall", single.overall_accuracy, cascade.overall_accuracy))
