import warnings

import numpy as np
import pytest

from clid.errors import DegenerateSpreadWarning, InvalidConfig, RankDeficient, TooFewPoints
from clid.predictors import ModelMetrics, clid_score, fit_wclid, wclid_loo, wclid_score
from clid.rank_stats import kendall_tau


def pop(cls, ids, accs=None):
    accs = accs if accs is not None else [None] * len(cls)
    return [ModelMetrics(f"m{i}", c, d, a) for i, (c, d, a) in enumerate(zip(cls, ids, accs))]


def test_zscore_example():
    s = clid_score(pop([0.2, 0.8], [5.0, 15.0]))
    np.testing.assert_allclose(s, [-2.0, 2.0])


def test_raw_example():
    assert clid_score([ModelMetrics("a", 0.5, 10.0)], "raw")[0] == 10.5


def test_zscore_oracle():
    rng = np.random.default_rng(0)
    cl, ids = rng.uniform(0, 1, 9), rng.uniform(2, 30, 9)
    expected = (cl - cl.mean()) / cl.std() + (ids - ids.mean()) / ids.std()
    np.testing.assert_allclose(clid_score(pop(cl, ids)), expected, rtol=1e-12)


def test_constant_metric_warns():
    with pytest.warns(DegenerateSpreadWarning):
        s = clid_score(pop([0.5, 0.5, 0.5], [1.0, 2.0, 3.0]))
    np.testing.assert_allclose(s, [-np.sqrt(1.5), 0, np.sqrt(1.5)])


def test_zscore_needs_two():
    with pytest.raises(TooFewPoints):
        clid_score(pop([0.5], [1.0]))


def test_model_validation():
    with pytest.raises(InvalidConfig):
        ModelMetrics("x", 1.5, 3.0)
    with pytest.raises(InvalidConfig):
        ModelMetrics("x", 0.5, 0.0)


def test_fit_recovers_exact_weights():
    rng = np.random.default_rng(1)
    cl, ids = rng.uniform(0.2, 0.9, 8), rng.uniform(3, 25, 8)
    acc = 0.5 * cl + 0.01 * ids + 0.1
    w = fit_wclid(pop(cl, ids, acc))
    np.testing.assert_allclose(w.w, [0.5, 0.01, 0.1], atol=1e-10)
    assert w.rss < 1e-20


def test_fit_matches_pinv():
    rng = np.random.default_rng(2)
    cl, ids = rng.uniform(0, 1, 12), rng.uniform(1, 40, 12)
    acc = rng.uniform(0.2, 0.9, 12)
    a = np.column_stack([cl, ids, np.ones(12)])
    w = fit_wclid(pop(cl, ids, acc))
    np.testing.assert_allclose(w.w, np.linalg.pinv(a) @ acc, atol=1e-8)
    resid = a @ w.w - acc
    np.testing.assert_allclose(a.T @ resid, 0.0, atol=1e-10)


def test_rank_deficient():
    cl = np.array([0.1, 0.2, 0.3, 0.4])
    with pytest.raises(RankDeficient):
        fit_wclid(pop(cl, 10 * cl + 1, [0.1, 0.2, 0.3, 0.5]))
    with pytest.raises(RankDeficient):
        fit_wclid(pop([0.5] * 4, [1.0, 2.0, 3.0, 4.0], [0.1, 0.2, 0.3, 0.5]))
    with pytest.raises(TooFewPoints):
        fit_wclid(pop([0.1, 0.2], [1.0, 2.0], [0.1, 0.2]))


def test_score_arithmetic_and_linearity():
    rng = np.random.default_rng(3)
    cl, ids, acc = rng.uniform(0, 1, 6), rng.uniform(1, 30, 6), rng.uniform(0, 1, 6)
    w = fit_wclid(pop(cl, ids, acc))
    m = ModelMetrics("q", 0.3, 7.0)
    assert wclid_score(w, m) == pytest.approx(w.w[0] * 0.3 + w.w[1] * 7.0 + w.w[2], abs=1e-15)
    w2 = fit_wclid(pop(cl, ids, 0.5 * acc))
    np.testing.assert_allclose(w2.w, 0.5 * w.w, rtol=1e-9)


def test_ranking_invariant_to_affine_id():
    rng = np.random.default_rng(4)
    cl, ids = rng.uniform(0, 1, 10), rng.uniform(1, 30, 10)
    a = clid_score(pop(cl, ids))
    b = clid_score(pop(cl, 3.0 * ids + 2.0))
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_loo():
    rng = np.random.default_rng(5)
    cl, ids = rng.uniform(0, 1, 7), rng.uniform(1, 30, 7)
    p = pop(cl, ids, 0.5 * cl + 0.01 * ids + 0.1)
    np.testing.assert_allclose(wclid_loo(p), [m.accuracy for m in p], atol=1e-10)


def test_co_monotone_population_orders_perfectly():
    cl = np.linspace(0.3, 0.9, 10)
    ids = np.linspace(4, 20, 10)
    acc = np.linspace(0.4, 0.8, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert kendall_tau(clid_score(pop(cl, ids)), acc) == 1.0
