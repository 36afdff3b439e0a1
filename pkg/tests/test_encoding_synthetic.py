import numpy as np
import pytest

from stepwise_ids.dataset import (
    CATEGORICAL,
    AttackLabel,
    Feature,
    FeatureSchema,
    Record,
    apply_encoding,
    fit_encoding,
    from_records,
    scaled_counts,
    separable_spec,
    synthesize,
)
from stepwise_ids.dataset.encoding import OTHER, EncodingMap
from stepwise_ids.dataset.synthetic import format_synth_spec, parse_synth_spec
from stepwise_ids.errors import SchemaError, SchemaMismatch

SCHEMA = FeatureSchema((Feature("a"), Feature("proto", CATEGORICAL)))


def _data(values, protos, labels=None):
    labels = labels or [AttackLabel.NORMAL] * len(values)
    return from_records(SCHEMA, [Record((v, p), l) for v, p, l in zip(values, protos, labels)])


def test_top_k_categories_and_other_column():
    train = _data([1.0] * 6, ["tcp", "tcp", "tcp", "udp", "udp", "arp"])
    enc = fit_encoding(train, max_categories=2)
    assert enc.categories["proto"] == ("tcp", "udp")
    test = apply_encoding(_data([0.0, 0.0], ["arp", "icmp"]), enc)
    assert test.schema.names == ["a", "proto=tcp", "proto=udp", f"proto={OTHER}"]
    assert test.X[:, 1:].tolist() == [[0, 0, 1], [0, 0, 1]]


def test_onehot_rows_sum_to_one_and_groups_map_back():
    train = _data([1.0, 2.0, 3.0], ["tcp", "udp", "tcp"])
    e = apply_encoding(train, fit_encoding(train))
    assert (e.X[:, 1:].sum(axis=1) == 1).all()
    assert e.schema.groups() == ["a", "proto"]


def test_frequency_ties_break_lexicographically():
    enc = fit_encoding(_data([0.0] * 4, ["b", "a", "b", "a"]), max_categories=1)
    assert enc.categories["proto"] == ("a",)


def test_standardize_uses_training_moments():
    train = _data([1.0, 2.0, 3.0, 6.0], ["tcp"] * 4)
    enc = fit_encoding(train)
    z = apply_encoding(train, enc, standardize=True).X[:, 0]
    assert z.mean() == pytest.approx(0.0, abs=1e-12) and z.std() == pytest.approx(1.0)


def test_no_standardize_leaves_values_bitwise_unchanged():
    values = [0.1, 1e30, -3.5e-7]
    train = _data(values, ["tcp"] * 3)
    out = apply_encoding(train, fit_encoding(train)).X[:, 0]
    assert out.tobytes() == np.asarray(values).tobytes()


def test_constant_numeric_std_stored_as_one():
    enc = fit_encoding(_data([4.0, 4.0], ["tcp", "tcp"]))
    assert enc.stds["a"] == 1.0


def test_encoding_map_dict_round_trip():
    enc = fit_encoding(_data([1.0, 2.0], ["tcp", "udp"]))
    assert EncodingMap.from_dict(enc.to_dict()) == enc


def test_apply_encoding_schema_mismatch():
    enc = fit_encoding(_data([1.0], ["tcp"]))
    other = from_records(FeatureSchema((Feature("b"),)), [Record((1.0,), AttackLabel.NORMAL)])
    with pytest.raises(SchemaMismatch):
        apply_encoding(other, enc)


def test_scaled_counts_round_up():
    counts = {AttackLabel.NORMAL: 56000, AttackLabel.WORM: 130}
    assert scaled_counts(counts, 100) == {AttackLabel.NORMAL: 560, AttackLabel.WORM: 2}
    assert scaled_counts({AttackLabel.WORM: 3}, 1000) == {AttackLabel.WORM: 1}


def test_synthesize_exact_counts_and_determinism():
    counts = {AttackLabel.NORMAL: 30, AttackLabel.DOS: 7, AttackLabel.WORM: 2}
    spec = separable_spec(counts)
    a, b = synthesize(spec, 5), synthesize(spec, 5)
    assert a.equals(b)
    assert not a.equals(synthesize(spec, 6))
    assert {l: int((a.labels == l.code).sum()) for l in counts} == counts


def test_separable_spec_signal_axes():
    counts = {AttackLabel.NORMAL: 200, AttackLabel.DOS: 200, AttackLabel.EXPLOITS: 200}
    d = synthesize(separable_spec(counts, spacing=10.0, n_noise=0), 0)
    x0 = d.columns[d.schema.index("x0")]
    dos = d.labels == AttackLabel.DOS.code
    assert x0[dos].mean() > 8 and abs(x0[~dos].mean()) < 1


def test_shared_labels_use_one_axis():
    counts = {AttackLabel.NORMAL: 5, AttackLabel.DOS: 5, AttackLabel.EXPLOITS: 5,
              AttackLabel.WORM: 5}
    spec = separable_spec(counts, shared=("DoS", "Exploits"), n_noise=0)
    assert [f.name for f in spec.features] == ["x0", "x1", "proto"]


def test_synth_spec_text_round_trip():
    spec = separable_spec({AttackLabel.NORMAL: 4, AttackLabel.GENERIC: 3}, n_noise=2)
    assert parse_synth_spec(format_synth_spec(spec)) == spec


def test_synth_spec_errors():
    with pytest.raises(SchemaError):
        parse_synth_spec("a,numeric\nattack_cat,label\n[Normal] 3\na = poisson 2\n[DoS] 1\na = gaussian 0 1\n")
    with pytest.raises(SchemaError):
        parse_synth_spec("a,numeric\nattack_cat,label\n[Normal] 3\na = gaussian 0 1\n")
