import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stepwise_ids.dataset import Feature, FeatureSchema, Record, AttackLabel, from_records
from stepwise_ids.dataset.core import relabel_binary
from stepwise_ids.errors import (
    CorruptModel,
    Diverged,
    EmptyPartition,
    NotBinary,
    NotEncoded,
    VersionMismatch,
    WidthMismatch,
)
from stepwise_ids.dataset.schema import CATEGORICAL
from stepwise_ids.learners import (
    TrainConfig,
    dumps,
    fit,
    gini,
    load_model,
    loads,
    model_hash,
    predict,
    save_model,
    train,
)
from stepwise_ids.learners.serialization import MAGIC


def _blobs(n=200, d=4, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n).astype(np.int8)
    X = rng.normal(size=(n, d))
    X[:, 0] += 3 * y
    return X, y


def test_gini_values():
    assert gini([5, 5]) == 0.5
    assert gini([7, 0]) == 0.0
    with pytest.raises(EmptyPartition):
        gini([0, 0])


@settings(max_examples=200)
@given(st.lists(st.integers(0, 1000), min_size=2, max_size=6).filter(lambda c: sum(c) > 0))
def test_gini_bounds(counts):
    g = gini(counts)
    assert 0.0 <= g <= 1 - 1 / len(counts) + 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(kind="svm")
    with pytest.raises(ValueError):
        TrainConfig(tree_count=0)
    assert TrainConfig().resolve_mtry(42) == 7
    assert TrainConfig(kind="tree").resolve_mtry(42) == 42
    with pytest.raises(ValueError):
        TrainConfig(features_per_split=5).resolve_mtry(4)


def test_tree_fits_training_data_exactly():
    X, y = _blobs()
    tree = fit(X, y, TrainConfig(kind="tree"))
    assert (tree.predict(X) == y).all()
    assert tree.leaves.size >= 2 and tree.depth >= 1


def test_tree_max_depth_zero_is_a_stump_of_the_prior():
    X, y = _blobs()
    tree = fit(X, y, TrainConfig(kind="tree", max_depth=0))
    assert tree.node_count == 1 and tree.score(X[:1])[0] == pytest.approx(y.mean())


def test_tree_ignores_constant_features():
    X, y = _blobs()
    X[:, 1] = 3.0
    tree = fit(X, y, TrainConfig(kind="tree"))
    assert 1 not in set(tree.feature.tolist())


def test_forest_is_seed_deterministic_and_thread_independent():
    X, y = _blobs(n=150)
    cfg = TrainConfig(tree_count=12, seed=3)
    one = fit(X, y, cfg)
    many = fit(X, y, TrainConfig(tree_count=12, seed=3, threads=6))
    assert dumps(one) == dumps(many)
    assert dumps(one) != dumps(fit(X, y, cfg.with_seed(4)))


def test_forest_without_bootstrap_uses_all_rows():
    X, y = _blobs(n=80)
    model = fit(X, y, TrainConfig(tree_count=3, bootstrap=False))
    assert all(t.n_samples[0] == 80 for t in model.trees)


def test_forest_scores_are_tree_means():
    X, y = _blobs(n=100)
    model = fit(X, y, TrainConfig(tree_count=5))
    assert np.allclose(model.score(X), np.mean([t.score(X) for t in model.trees], axis=0))
    assert ((model.score(X) >= 0) & (model.score(X) <= 1)).all()


def test_logistic_separates_and_loss_decreases():
    X, y = _blobs(n=400)
    model = fit(X, y, TrainConfig(kind="logistic", epochs=300, learning_rate=1.0))
    assert (model.predict(X) == y).mean() > 0.9
    hist = np.asarray(model.loss_history)
    assert (np.diff(hist) <= 0).all()


def test_logistic_diverges_on_overflow():
    X, y = _blobs(n=50)
    with pytest.raises(Diverged):
        fit(X * 1e200, y, TrainConfig(kind="logistic", learning_rate=1e10))


def test_predict_single_record_and_width_check():
    X, y = _blobs()
    model = fit(X, y, TrainConfig(kind="tree"))
    p = predict(model, X[0])
    assert p.label == int(p.score >= 0.5)
    with pytest.raises(WidthMismatch):
        model.predict(X[:, :2])


def test_train_requires_encoded_binary_data():
    schema = FeatureSchema((Feature("a"), Feature("p", CATEGORICAL)))
    raw = from_records(schema, [Record((1.0, "x"), AttackLabel.NORMAL), Record((2.0, "y"), AttackLabel.DOS)])
    with pytest.raises(NotEncoded):
        train(relabel_binary(raw, {AttackLabel.DOS}), TrainConfig())
    numeric = from_records(FeatureSchema((Feature("a"),)),
                           [Record((1.0,), AttackLabel.NORMAL), Record((2.0,), AttackLabel.DOS)])
    with pytest.raises(NotBinary):
        train(numeric, TrainConfig())


@pytest.mark.parametrize("kind", ["tree", "forest", "logistic"])
def test_serialization_round_trip(tmp_path, kind):
    X, y = _blobs()
    model = fit(X, y, TrainConfig(kind=kind, tree_count=4), "fp123")
    path = tmp_path / "m.bin"
    save_model(model, path)
    back = load_model(path)
    assert back.kind == kind and back.schema_fingerprint == "fp123"
    assert np.array_equal(back.score(X), model.score(X))
    assert dumps(back) == dumps(model) and model_hash(back) == model_hash(model)


def test_corrupt_and_future_model_files():
    X, y = _blobs()
    data = dumps(fit(X, y, TrainConfig(kind="tree")))
    with pytest.raises(CorruptModel):
        loads(b"NOTAMODEL" + data[9:])
    flipped = bytearray(data)
    flipped[-1] ^= 0xFF
    with pytest.raises(CorruptModel):
        loads(bytes(flipped))
    with pytest.raises(CorruptModel):
        loads(data[: len(data) // 2])
    future = MAGIC + (99).to_bytes(2, "little") + data[len(MAGIC) + 2:]
    with pytest.raises(VersionMismatch):
        loads(future)
