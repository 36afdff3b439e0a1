from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stepwise_ids.dataset import ALL_LABELS, AttackLabel
from stepwise_ids.errors import EmptyEvaluation, NoNegatives, NoPositives
from stepwise_ids.metrics import (
    BinaryConfusion,
    MulticlassConfusion,
    binary_report,
    far,
    micro_accuracy,
    overall_accuracy,
    overall_error,
    per_class_accuracy,
    und,
)

counts = st.integers(min_value=0, max_value=10**6)


def test_hand_computed_values():
    c = BinaryConfusion(tp=90, fp=5, tn=95, fn=10)
    assert far(c) == 5.0 and und(c) == 10.0
    assert overall_error(c) == 7.5 and overall_accuracy(c) == 92.5


def test_from_predictions():
    c = BinaryConfusion.from_predictions([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 1, 1, 1)


def test_undefined_rates_raise():
    with pytest.raises(NoNegatives):
        far(BinaryConfusion(tp=1))
    with pytest.raises(NoPositives):
        und(BinaryConfusion(tn=1))
    with pytest.raises(EmptyEvaluation):
        overall_error(BinaryConfusion())


@settings(max_examples=300)
@given(counts, counts, counts, counts)
def test_error_plus_accuracy_is_exactly_100(tp, fp, tn, fn):
    c = BinaryConfusion(tp, fp, tn, fn)
    if c.total:
        assert overall_error(c) + overall_accuracy(c) == 100


@settings(max_examples=300)
@given(counts, counts, counts, counts)
def test_rates_match_exact_fractions(tp, fp, tn, fn):
    c = BinaryConfusion(tp, fp, tn, fn)
    if tn + fp:
        assert far(c) == float(Fraction(100 * fp, tn + fp))
    if tp + fn:
        assert und(c) == float(Fraction(100 * fn, tp + fn))


@settings(max_examples=200)
@given(counts, counts, counts, counts)
def test_swapping_convention_swaps_far_and_und(tp, fp, tn, fn):
    c = BinaryConfusion(tp, fp, tn, fn)
    if tp + fn and tn + fp:
        assert far(c.swapped()) == und(c) and und(c.swapped()) == far(c)
        assert overall_error(c.swapped()) == overall_error(c)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.sampled_from(ALL_LABELS), st.sampled_from(ALL_LABELS)), min_size=1))
def test_multiclass_confusion_totals(pairs):
    t = [a.code for a, _ in pairs]
    p = [b.code for _, b in pairs]
    m = MulticlassConfusion.from_predictions(t, p)
    assert m.total == len(pairs)
    assert sum(m.support().values()) == len(pairs)
    correct = sum(a == b for a, b in pairs)
    assert micro_accuracy(m) == 100 * correct / len(pairs)
    assert set(per_class_accuracy(m)) == {a for a, _ in pairs}
    assert MulticlassConfusion.from_dict(m.to_dict()).counts.tolist() == m.counts.tolist()


def test_multiclass_rejects_labels_outside_taxonomy():
    with pytest.raises(ValueError):
        MulticlassConfusion.from_predictions([AttackLabel.DOS.code], [AttackLabel.DOS.code],
                                             labels=[AttackLabel.NORMAL])


def test_binary_report_per_class():
    labels = np.array([AttackLabel.NORMAL.code] * 4 + [AttackLabel.DOS.code] * 2)
    y_true = (labels != AttackLabel.NORMAL.code).astype(int)
    y_pred = np.array([0, 0, 0, 1, 1, 0])
    r = binary_report(y_true, y_pred, labels)
    assert r.per_class_accuracy == {AttackLabel.NORMAL: 75.0, AttackLabel.DOS: 50.0}
    assert r.support == {AttackLabel.NORMAL: 4, AttackLabel.DOS: 2}
    assert "Overall error" in r.to_text() and '"far_pct": 25.0' in r.to_json()


def test_binary_report_without_negatives():
    r = binary_report([1, 1], [1, 0])
    assert r.far is None and r.und == 50.0
    assert "n/a" in r.to_text()
