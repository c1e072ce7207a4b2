import math

import numpy as np
import pytest

from clid.embeddings import Metric, NeighborTable, knn_query
from clid.errors import DegenerateRatios, DuplicatePointsWarning, TooFewPoints, ZeroDistance
from clid.intrinsic_dim import (
    knn_entropy,
    log_unit_ball_volume,
    mle_local_id,
    twonn_fit_from_ratios,
    twonn_id,
)
from clid.synth import SynthSpec, gen_hypercube_manifold, gen_linear_subspace
from oracles import zero_intercept_slope


def pareto_ratios(d, n, seed):
    # inverse cdf of F(mu) = 1 - mu^-d
    u = np.random.default_rng(seed).random(n)
    return (1.0 - u) ** (-1.0 / d)


def table_from(t_rows, metric=Metric.EUCLIDEAN):
    t = np.asarray(t_rows, dtype=float)
    return NeighborTable(np.zeros(t.shape, dtype=np.int64), t, metric)


def test_pareto_d7_recovery():
    fit = twonn_fit_from_ratios(pareto_ratios(7, 10_000, 0), 0.1)
    assert fit.id == pytest.approx(7, abs=0.3)
    assert fit.n_used == 9000


def test_two_equal_ratios_single_usable_point():
    fit = twonn_fit_from_ratios([2.0, 2.0], 0.0)
    # only i=1 has 1 - F > 0: slope = log 2 / log 2
    assert fit.n_used == 1
    assert fit.id == pytest.approx(1.0)


def test_hand_regression_oracle():
    mu = [2.0, 4.0, 8.0, 16.0]
    xs = [math.log(v) for v in mu[:3]]
    ys = [-math.log(1 - i / 4) for i in (1, 2, 3)]
    expected = zero_intercept_slope(xs, ys)
    assert expected == pytest.approx((math.log(4 / 3) + 8 * math.log(2)) / (14 * math.log(2)))
    assert twonn_fit_from_ratios(mu, 0.0).id == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("n", [1_000, 10_000, 100_000])
def test_duplication_gap_shrinks_like_one_over_n(n):
    mu = pareto_ratios(7, n, 1)
    a = twonn_fit_from_ratios(mu, 0.1).id
    b = twonn_fit_from_ratios(np.repeat(mu, 2), 0.1).id
    assert abs(a - b) / a <= 1.0 / n


def test_fit_errors():
    with pytest.raises(TooFewPoints):
        twonn_fit_from_ratios([1.5, 2.0], 0.5)
    with pytest.raises(DegenerateRatios):
        twonn_fit_from_ratios([1.0, 1.0, 1.0], 0.0)


@pytest.mark.slow
@pytest.mark.parametrize("d", [2, 5, 10])
def test_pareto_convergence_1e5(d):
    assert abs(twonn_fit_from_ratios(pareto_ratios(d, 100_000, d), 0.1).id - d) < 0.1


@pytest.mark.slow
@pytest.mark.parametrize(
    "d,m,lo,hi", [(2, 64, 1.7, 2.3), (5, 64, 4.2, 5.8)]
)
def test_twonn_hypercube(d, m, lo, hi):
    e, _ = gen_hypercube_manifold(SynthSpec(n=5000, intrinsic_dim=d, ambient_dim=m, seed=11))
    assert lo <= twonn_id(e).id <= hi


def test_twonn_segment():
    e, _ = gen_hypercube_manifold(SynthSpec(n=5000, intrinsic_dim=1, ambient_dim=16, seed=12))
    assert 0.9 <= twonn_id(e).id <= 1.1


def test_twonn_subspace():
    e, _ = gen_linear_subspace(SynthSpec(kind="subspace", n=5000, intrinsic_dim=5, ambient_dim=64, seed=13))
    assert 4.2 <= twonn_id(e).id <= 5.8


def test_twonn_scaling_bit_invariant_and_rotation():
    rng = np.random.default_rng(14)
    x = rng.random((800, 3))
    base = twonn_id(x)
    scaled = twonn_id(x * 8.0)
    np.testing.assert_array_equal(base.mu, scaled.mu)
    assert base.id == scaled.id
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    assert twonn_id(x @ q.T + 5.0).id == pytest.approx(base.id, abs=1e-6)


def test_twonn_drops_duplicates():
    x = np.random.default_rng(15).random((200, 2))
    x = np.vstack([x, x[:5]])
    with pytest.warns(DuplicatePointsWarning):
        fit = twonn_id(x)
    assert fit.n_duplicates == 10


def test_twonn_too_few():
    with pytest.raises(TooFewPoints):
        twonn_id(np.eye(2))


def test_mle_closed_forms():
    assert mle_local_id(table_from([[1.0, math.e]]), 2).local_id[0] == pytest.approx(1.0)
    est = mle_local_id(table_from([[1.0, 1.0, math.exp(0.5)]]), 3)
    assert est.local_id[0] == pytest.approx(2.0)


def test_mle_pooling_and_exclusion():
    est = mle_local_id(table_from([[1.0, math.e], [1.0, math.exp(0.5)], [0.0, 1.0]]), 2)
    assert est.valid.tolist() == [True, True, False]
    assert est.global_id == pytest.approx(1.5)
    harm = mle_local_id(table_from([[1.0, math.e], [1.0, math.exp(0.5)]]), 2, pooling="harmonic")
    assert harm.global_id == pytest.approx(1 / ((1 + 0.5) / 2))
    with pytest.raises(ZeroDistance):
        mle_local_id(table_from([[0.0, 0.0]]), 2)


def test_mle_ratio_only():
    x = np.random.default_rng(16).standard_normal((300, 4))
    t = knn_query(x, 10)
    scaled = NeighborTable(t.indices, t.distances * 3.7, t.metric)
    np.testing.assert_allclose(mle_local_id(t, 10).local_id, mle_local_id(scaled, 10).local_id, rtol=1e-9)


@pytest.mark.slow
def test_mle_hypercube_5d():
    e, _ = gen_hypercube_manifold(SynthSpec(n=5000, intrinsic_dim=5, ambient_dim=64, seed=17))
    assert 4.2 <= mle_local_id(knn_query(e, 20), 20).global_id <= 5.8


def test_log_unit_ball_volume():
    np.testing.assert_allclose(log_unit_ball_volume([1, 2, 3]), np.log([2.0, math.pi, 4 * math.pi / 3]))


def test_entropy_unit_square():
    x = np.random.default_rng(0).random((10_000, 2))
    est = knn_entropy(x, 10)
    assert -0.15 <= est.entropy <= 0.15


def test_entropy_interval_0_3():
    x = 3.0 * np.random.default_rng(0).random((10_000, 1))
    assert knn_entropy(x, 10).entropy == pytest.approx(math.log(3), abs=0.15)


@pytest.mark.parametrize("pooling", ["harmonic", "mean", "local"])
def test_entropy_scale_law(pooling):
    x = np.random.default_rng(1).random((3000, 2))
    a, b = knn_entropy(x, 10, pooling=pooling), knn_entropy(2.0 * x, 10, pooling=pooling)
    np.testing.assert_array_equal(a.local_id, b.local_id)
    shift = np.nanmean(a.density_dim) * math.log(2)
    assert b.entropy - a.entropy == pytest.approx(shift, abs=1e-9)
    if pooling == "local":
        assert shift == pytest.approx(np.nanmean(a.local_id) * math.log(2), abs=1e-12)


def test_entropy_translation_invariant():
    x = np.random.default_rng(2).random((2000, 2))
    assert knn_entropy(x + 3.0, 10).entropy == pytest.approx(knn_entropy(x, 10).entropy, abs=1e-9)
