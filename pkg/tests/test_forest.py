import numpy as np
import pytest

from homemb import ForestConfig, ForestError, RandomForest


def fit(x, y, **kw):
    cfg = ForestConfig(**{"num_trees": 20, "seed": 0, **kw})
    f = RandomForest(cfg)
    f.fit(np.asarray(x, dtype=float), np.asarray(y))
    return f


def test_constant_labels_predict_that_label():
    f = fit([[0.0], [1.0], [2.0]], [1, 1, 1])
    assert list(f.predict(np.array([[5.0], [-3.0]]))) == [1, 1]


def test_separable_clusters_fit_exactly():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(0, 0.1, (30, 1)), rng.normal(10, 0.1, (30, 1))])
    y = np.array([0] * 30 + [1] * 30)
    f = fit(x, y, num_trees=30)
    assert np.array_equal(f.predict(x), y)
    assert list(f.predict(np.array([[0.2], [9.9]]))) == [0, 1]


def test_noise_features_stay_near_chance():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(500, 4))
    y = np.arange(500) % 2
    rng.shuffle(y)
    f = fit(x[:400], y[:400], num_trees=50)
    acc = np.mean(f.predict(x[400:]) == y[400:])
    assert 0.3 <= acc <= 0.7


def test_deterministic_under_seed():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(80, 3))
    y = (x[:, 0] + rng.normal(0, 0.5, 80) > 0).astype(int)
    a, b = fit(x, y, seed=42), fit(x, y, seed=42)
    probe = rng.normal(size=(40, 3))
    assert np.array_equal(a.predict(probe), b.predict(probe))
    c = fit(x, y, seed=43)
    assert not np.array_equal(a.votes(probe), c.votes(probe))


def test_feature_importances_normalized():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(120, 5))
    y = (x[:, 2] > 0).astype(int)  # only feature 2 is informative
    f = fit(x, y, num_trees=40)
    imp = f.feature_importances()
    assert imp.shape == (5,)
    assert np.all(imp >= 0)
    assert imp.sum() == pytest.approx(1.0)
    assert np.argmax(imp) == 2


def test_importances_uniform_when_nothing_splits():
    f = fit([[1.0], [1.0], [1.0], [1.0]], [0, 1, 0, 1], num_trees=5)
    assert f.feature_importances() == pytest.approx([1.0])


def test_config_validation():
    with pytest.raises(ForestError):
        ForestConfig(num_trees=0)
    with pytest.raises(ForestError):
        ForestConfig(min_samples_leaf=0)


def test_fit_validation():
    f = RandomForest(ForestConfig(num_trees=2))
    with pytest.raises(ForestError):
        f.fit(np.zeros((1, 2)), np.array([0]))
    with pytest.raises(ForestError):
        f.fit(np.array([[np.nan], [1.0]]), np.array([0, 1]))
    with pytest.raises(ForestError):
        f.predict(np.zeros((2, 2)))  # untrained


def test_max_depth_limits_tree():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(200, 3))
    y = ((x[:, 0] > 0) ^ (x[:, 1] > 0)).astype(int)
    shallow = fit(x, y, max_depth=1, num_trees=10)
    deep = fit(x, y, max_depth=None, num_trees=10)
    # depth-1 stumps cannot express xor; full trees can
    acc_s = np.mean(shallow.predict(x) == y)
    acc_d = np.mean(deep.predict(x) == y)
    assert acc_d > acc_s


def test_min_samples_leaf_respected():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(60, 2))
    y = (x[:, 0] > 0).astype(int)
    f = fit(x, y, min_samples_leaf=10, bootstrap=False, num_trees=1)
    tree = f.trees_[0]
    # every leaf must have been formed from >= 10 training rows
    counts = np.zeros(len(tree.feature))
    for row in x:
        node = 0
        while tree.feature[node] >= 0:
            node = tree.left[node] if row[tree.feature[node]] <= tree.threshold[node] else tree.right[node]
        counts[node] += 1
    leaf_ids = [i for i, ft in enumerate(tree.feature) if ft < 0]
    assert all(counts[i] >= 10 for i in leaf_ids)


def test_votes_shape_and_majority():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(50, 2))
    y = (x[:, 0] > 0).astype(int)
    f = fit(x, y, num_trees=7)
    v = f.votes(x[:5])
    assert v.shape == (5, 2)
    assert np.all(v.sum(axis=1) == 7)
    assert np.array_equal(f.predict(x[:5]), np.argmax(v, axis=1))
