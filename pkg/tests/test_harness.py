import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from small_learner.data import Dataset
from small_learner.harness import (
    BaselineConfig,
    EvalReport,
    LinearModel,
    _logistic_objective,
    baseline_trainer,
    benchmark,
    cross_validate,
    expand_grid,
    format_table,
    normalized_accuracy,
    retrain_top_features,
    soft_threshold,
    sparse_baseline,
    top_features,
    train_l1_logreg,
)
from small_learner.synthetic import desk_instance


@pytest.fixture(scope="module")
def desk():
    return desk_instance(m=80, seed=2)


@settings(max_examples=300, deadline=None)
@given(st.floats(-50, 50), st.floats(0, 20))
def test_soft_threshold_is_the_1d_prox(v, tau):
    x = float(soft_threshold(v, tau))

    def f(z):
        return 0.5 * (z - v) ** 2 + tau * abs(z)

    # the minimizer of a piecewise quadratic lies at a stationary point of a
    # piece or at the kink
    candidates = [0.0, v - tau, v + tau]
    best = min(candidates, key=f)
    assert f(x) <= f(best) + 1e-12
    assert abs(x - best) <= 1e-8 or abs(f(x) - f(best)) <= 1e-12
    grid = np.linspace(x - 1, x + 1, 2001)
    assert f(x) <= min(f(z) for z in grid) + 1e-12


def test_full_shrinkage_gives_prior_bias():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 3))
    y = np.where(np.arange(50) < 15, 1.0, -1.0)
    d = Dataset(X, y, ("a", "b", "c"))
    m = train_l1_logreg(d, BaselineConfig(c=1e6))
    assert not m.weights.any()
    assert m.bias == pytest.approx(math.log(15 / 35), abs=1e-3)


def test_weak_penalty_separates_1d():
    X = np.array([[-2.0], [-1.0], [-0.5], [0.5], [1.0], [2.0]])
    y = np.array([-1, -1, -1, 1, 1, 1.0])
    m = train_l1_logreg(Dataset(X, y, ("a",)), BaselineConfig(c=1e-6))
    assert np.mean(m.predict(X) == y) == 1.0


def test_descent_property(desk):
    for pen in ("l1", "elasticnet"):
        cfg = BaselineConfig(penalty=pen, c=1e-2)
        m = train_l1_logreg(desk, cfg)
        l2 = cfg.c if pen == "elasticnet" else 0.0
        at_out = _logistic_objective(m.weights, m.bias, desk.features, desk.labels, cfg.c, l2)
        at_zero = _logistic_objective(np.zeros(desk.n), 0.0, desk.features, desk.labels, cfg.c, l2)
        assert at_out <= at_zero


def test_top_features_examples():
    np.testing.assert_array_equal(top_features([0.9, -0.1, 0.5], 2), [0, 2])
    np.testing.assert_array_equal(top_features([0.9, -0.1, 0.5], 3), [0, 1, 2])
    np.testing.assert_array_equal(top_features([0.5, -0.5, 0.5], 2), [0, 1])  # lower index wins
    with pytest.raises(ValueError):
        top_features([1.0], 0)


def test_retrain_support(desk):
    rng = np.random.default_rng(1)
    for budget in (1, 3, desk.n):
        w = rng.standard_normal(desk.n)
        m = retrain_top_features(desk, w, budget)
        chosen = set(top_features(w, budget).tolist())
        assert set(np.flatnonzero(m.weights).tolist()) <= chosen
        assert m.feature_count <= budget


def test_sparse_baseline_budget(desk):
    m = sparse_baseline(desk, BaselineConfig(c=1e-3))
    assert m.feature_count <= desk.n // 2
    m = sparse_baseline(desk, BaselineConfig(c=1e-3, retrain_budget=2))
    assert m.feature_count <= 2


def test_normalized_accuracy():
    assert normalized_accuracy(0.94, 6) == pytest.approx(15.6667, abs=1e-4)
    assert math.isnan(normalized_accuracy(0.9, 0))
    r = EvalReport([0.9, 1.0], [2, 4])
    assert r.mean == pytest.approx(0.95) and r.std == pytest.approx(0.05) and r.features == 3
    assert r.normalized == pytest.approx(100 * 0.95 / 3)


def test_expand_grid_order():
    assert expand_grid({"a": (1, 2), "b": (3,)}) == [{"a": 1, "b": 3}, {"a": 2, "b": 3}]


class _Fixed:
    def __init__(self, sign, feats):
        self.sign, self.feature_count = sign, feats

    def predict(self, X):
        return np.full(X.shape[0], self.sign)


def test_cross_validate_rules(desk):
    def trainer(d, params):
        return _Fixed(params["sign"], params["feats"])

    major = 1.0 if np.sum(desk.labels > 0) > desk.m / 2 else -1.0
    params, rep = cross_validate(desk, [{"sign": -major, "feats": 1}], 5, trainer)
    assert params == {"sign": -major, "feats": 1} and len(rep.accuracies) == 5
    # the majority-class predictor dominates on aggregate
    params, _ = cross_validate(desk, [{"sign": -major, "feats": 1}, {"sign": major, "feats": 9}], 5, trainer)
    assert params["sign"] == major
    # equal accuracy: smaller model wins, then grid order
    grid = [{"sign": major, "feats": 3}, {"sign": major, "feats": 2}, {"sign": major, "feats": 2, "x": 1}]
    params, _ = cross_validate(desk, grid, 5, trainer)
    assert params == {"sign": major, "feats": 2}


def test_cross_validate_deterministic(desk):
    t = baseline_trainer(BaselineConfig(retrain_budget=3))
    grid = {"c": (1e-1, 1e-2, 1e-3)}
    a = cross_validate(desk, grid, 5, t, seed=4)
    b = cross_validate(desk, grid, 5, t, seed=4)
    assert a[0] == b[0] and a[1].accuracies == b[1].accuracies


def test_benchmark_rows(desk):
    methods = {
        "L1L": (baseline_trainer(BaselineConfig(retrain_budget=3)), {"c": (1e-2, 1e-3)}),
        "ENL": (baseline_trainer(BaselineConfig(penalty="elasticnet", retrain_budget=3)), {"c": (1e-2,)}),
    }
    reports = benchmark(desk, methods, n_splits=2, folds=3)
    assert [r.method for r in reports] == ["L1L", "ENL"]
    for r in reports:
        assert len(r.accuracies) == 2 and all(0 <= a <= 1 for a in r.accuracies)
        fields = r.row().split("\t")
        assert float(fields[5]) == pytest.approx(100 * float(fields[2]) / float(fields[4]))
    assert len(format_table(reports).splitlines()) == 4


def test_linear_model():
    m = LinearModel(np.array([1.0, 0.0]), -0.5)
    np.testing.assert_array_equal(m.predict(np.array([[1.0, 3.0], [0.5, 3.0]])), [1, -1])
    assert m.feature_count == 1


def test_config_validation():
    with pytest.raises(ValueError):
        BaselineConfig(penalty="l0")
    with pytest.raises(ValueError):
        BaselineConfig(c=0)
    with pytest.raises(ValueError):
        BaselineConfig(retrain_budget=0)
