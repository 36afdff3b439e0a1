import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stepwise_ids.dataset import (
    ALL_LABELS,
    CATEGORICAL,
    TEST_COUNTS,
    TRAIN_COUNTS,
    AttackLabel,
    Dataset,
    Feature,
    FeatureSchema,
    Record,
    by_count,
    class_stats,
    drop_constant_features,
    filter_labels,
    from_records,
    infer_schema,
    load_csv,
    parse_label,
    parse_labels,
    read_schema,
    relabel_binary,
    restrict_labels,
    unsw_nb15_schema,
    write_csv,
    write_schema,
)
from stepwise_ids.dataset.schema import format_schema, parse_schema_lines
from stepwise_ids.errors import (
    AllFeaturesConstant,
    AllRecordsExcluded,
    BadNumeric,
    EmptyFile,
    MissingColumn,
    SchemaError,
    UnknownLabel,
)

SCHEMA = FeatureSchema((Feature("a"), Feature("proto", CATEGORICAL), Feature("b")))


def _write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# labels

@pytest.mark.parametrize("token, label", [
    ("Normal", AttackLabel.NORMAL), ("normal", AttackLabel.NORMAL), ("", AttackLabel.NORMAL),
    ("  DoS ", AttackLabel.DOS), ("Worms", AttackLabel.WORM), ("Backdoors", AttackLabel.BACKDOOR),
    ("reconnaissance", AttackLabel.RECONNAISSANCE), ("RECONNAISSANCE", AttackLabel.RECONNAISSANCE),
])
def test_parse_label_tokens(token, label):
    assert parse_label(token) is label


def test_unknown_label_names_row_and_token():
    with pytest.raises(UnknownLabel) as err:
        parse_label("Ransomware", row=7)
    assert "7" in str(err.value) and "Ransomware" in str(err.value)


def test_parse_labels_comma_list():
    assert parse_labels("Exploits, DoS") == {AttackLabel.EXPLOITS, AttackLabel.DOS}


def test_label_order_by_training_count():
    expected = ["Normal", "Generic", "Exploits", "Fuzzers", "DoS", "Reconnaissance", "Analysis",
                "Backdoor", "Shellcode", "Worm"]
    assert [l.value for l in by_count(ALL_LABELS)] == expected


def test_stage_order_key_on_table_counts():
    order = by_count(ALL_LABELS, TRAIN_COUNTS)
    assert order.index(AttackLabel.GENERIC) < order.index(AttackLabel.EXPLOITS) < order.index(
        AttackLabel.RECONNAISSANCE)


def test_published_counts():
    assert TRAIN_COUNTS[AttackLabel.NORMAL] == 56000 and TEST_COUNTS[AttackLabel.NORMAL] == 37000
    assert TRAIN_COUNTS[AttackLabel.WORM] == 130 and TEST_COUNTS[AttackLabel.WORM] == 45


def test_normal_share_of_training_records():
    # published table: Normal 31.90% of training; recomputed from the counts it is 31.94%
    share = 100 * TRAIN_COUNTS[AttackLabel.NORMAL] / sum(TRAIN_COUNTS.values())
    assert share == pytest.approx(31.90, abs=0.05)


# schema

def test_schema_rejects_duplicates_and_label_as_feature():
    with pytest.raises(SchemaError):
        FeatureSchema((Feature("a"), Feature("a")))
    with pytest.raises(SchemaError):
        FeatureSchema((Feature("attack_cat"),))


def test_schema_file_round_trip(tmp_path):
    schema = FeatureSchema(SCHEMA.features, "attack_cat", "id", ("label",))
    path = tmp_path / "schema.txt"
    write_schema(schema, path)
    assert read_schema(path) == schema
    assert parse_schema_lines(format_schema(schema).splitlines()).fingerprint() == schema.fingerprint()


def test_unsw_schema_shape():
    s = unsw_nb15_schema()
    assert s.width == 42
    assert [f.name for f in s.features if f.kind == CATEGORICAL] == ["proto", "service", "state"]
    assert "label" in s.ignored and s.id_column == "id"


def test_infer_schema_kinds(tmp_path):
    path = _write(tmp_path, "id,a,proto,label,attack_cat\n1,0.5,tcp,0,Normal\n2,1e3,udp,1,DoS\n")
    s = infer_schema(path)
    assert [(f.name, f.kind) for f in s.features] == [("a", "numeric"), ("proto", "categorical")]


# loading

def test_load_csv_basic(tmp_path):
    path = _write(tmp_path, "a,proto,b,extra,attack_cat\n1.5,tcp,2,x,Normal\n-3,udp,4,y,DoS\n")
    d = load_csv(path, SCHEMA)
    assert len(d) == 2
    assert d.record(1) == Record((-3.0, "udp", 4.0), AttackLabel.DOS)


def test_load_csv_missing_column(tmp_path):
    path = _write(tmp_path, "a,proto,attack_cat\n1,tcp,Normal\n")
    with pytest.raises(MissingColumn) as err:
        load_csv(path, SCHEMA)
    assert "b" in str(err.value)


def test_load_csv_bad_numeric_names_row_and_column(tmp_path):
    path = _write(tmp_path, "a,proto,b,attack_cat\n1,tcp,2,Normal\n1,tcp,oops,Normal\n")
    with pytest.raises(BadNumeric) as err:
        load_csv(path, SCHEMA)
    assert (err.value.row, err.value.column) == (2, "b")
    skipped = load_csv(path, SCHEMA, skip_bad_rows=True)
    assert len(skipped) == 1


def test_load_csv_empty(tmp_path):
    with pytest.raises(EmptyFile):
        load_csv(_write(tmp_path, ""), SCHEMA)
    with pytest.raises(EmptyFile):
        load_csv(_write(tmp_path, "a,proto,b,attack_cat\n", "h.csv"), SCHEMA)


def test_load_csv_unknown_label(tmp_path):
    path = _write(tmp_path, "a,proto,b,attack_cat\n1,tcp,2,Normal\n1,tcp,2,Martian\n")
    with pytest.raises(UnknownLabel):
        load_csv(path, SCHEMA)


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    n = 50
    d = Dataset(SCHEMA, (rng.normal(size=n) * 1e6, rng.choice(["tcp", "udp"], n).astype(object),
                         rng.random(n) / 3), rng.integers(0, len(ALL_LABELS), n).astype(np.int8))
    path = tmp_path / "rt.csv"
    write_csv(d, path)
    assert load_csv(path, SCHEMA).equals(d)


# transformations

def _small():
    records = [Record((float(i), "tcp" if i % 2 else "udp", 1.0), label)
               for i, label in enumerate([AttackLabel.NORMAL, AttackLabel.DOS, AttackLabel.FUZZERS,
                                          AttackLabel.NORMAL, AttackLabel.WORM])]
    return from_records(SCHEMA, records)


def test_filter_and_restrict():
    d = _small()
    assert AttackLabel.FUZZERS not in filter_labels(d, {AttackLabel.FUZZERS}).label_set()
    assert restrict_labels(d, {AttackLabel.NORMAL}).label_set() == {AttackLabel.NORMAL}
    with pytest.raises(AllRecordsExcluded):
        filter_labels(d, set(ALL_LABELS))


def test_relabel_binary_keeps_original_labels():
    d = relabel_binary(_small(), {AttackLabel.DOS, AttackLabel.WORM})
    assert d.binary and d.labels.tolist() == [0, 1, 0, 0, 1]
    assert d.attack_labels.tolist() == _small().labels.tolist()


def test_class_stats_counts_and_percentages():
    stats = class_stats(_small())
    assert stats.counts[AttackLabel.NORMAL] == 2 and stats.total == 5
    assert stats.percentages[AttackLabel.NORMAL] == 40.0


def test_drop_constant_features():
    d, dropped = drop_constant_features(_small())
    assert dropped == ["b"] and d.schema.names == ["a", "proto"]
    const = from_records(FeatureSchema((Feature("a"),)), [Record((1.0,), AttackLabel.NORMAL)] * 3)
    with pytest.raises(AllFeaturesConstant):
        drop_constant_features(const)


def test_dataset_is_immutable():
    d = _small()
    with pytest.raises(Exception):
        d.labels = None


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(list(AttackLabel)), min_size=1, max_size=40))
def test_class_stats_partition_the_total(labels):
    d = from_records(FeatureSchema((Feature("a"),)), [Record((0.0,), l) for l in labels])
    stats = class_stats(d)
    assert sum(stats.counts.values()) == stats.total == len(labels)
    assert sum(stats.percentages.values()) == pytest.approx(100.0)
