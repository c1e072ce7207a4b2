import numpy as np
import pytest

from clid.errors import EmptyAfterChunking, InvalidConfig, LabelLengthMismatch
from clid.learnability import (
    PrequentialConfig,
    cluster_learnability,
    prequential_knn,
    resolve_clusters,
)
from clid.synth import SynthSpec, gen_gaussian_blobs


def blobs(n, n_blobs, separation, m=64, seed=0):
    spec = SynthSpec(kind="blobs", n=n, intrinsic_dim=None, ambient_dim=m, n_blobs=n_blobs, separation=separation, seed=seed)
    return gen_gaussian_blobs(spec)


def brute_prequential(x, labels, cfg):
    """Loop version of the chunked protocol on Euclidean distances."""
    order = np.random.default_rng(cfg.seed).permutation(len(x))
    x, y = np.asarray(x, float)[order], np.asarray(labels)[order]
    accs = []
    for s in range(0, len(x), cfg.chunk_size):
        xc, yc = x[s : s + cfg.chunk_size], y[s : s + cfg.chunk_size]
        if len(xc) < 2:
            continue
        hits = 0
        for i in range(1, len(xc)):
            cands = sorted((float(np.sum((xc[j] - xc[i]) ** 2)), j) for j in range(i))
            votes = {}
            for _, j in cands[: cfg.n_neighbors]:
                votes[yc[j]] = votes.get(yc[j], 0) + 1
            best = max(votes.values())
            pred = min(lab for lab, v in votes.items() if v == best)
            hits += pred == yc[i]
        accs.append(hits / (len(xc) - 1))
    return float(np.mean(accs)), accs


@pytest.mark.parametrize("n_neighbors,chunk", [(1, 1000), (3, 37), (5, 60)])
def test_matches_loop_oracle(n_neighbors, chunk):
    rng = np.random.default_rng(n_neighbors)
    x = rng.standard_normal((150, 3))
    labels = rng.integers(0, 4, size=150)
    cfg = PrequentialConfig(n_neighbors=n_neighbors, chunk_size=chunk, seed=4)
    res = prequential_knn(x, labels, "euclidean", cfg)
    cl, accs = brute_prequential(x, labels, cfg)
    assert res.cl == pytest.approx(cl, abs=1e-15)
    np.testing.assert_allclose(res.per_chunk_accuracy, accs)


def test_single_label_is_one():
    x = np.random.default_rng(0).standard_normal((100, 4))
    assert prequential_knn(x, np.zeros(100, dtype=int)).cl == 1.0


def test_unique_labels_is_zero():
    x = np.random.default_rng(0).standard_normal((100, 4))
    assert prequential_knn(x, np.arange(100)).cl == 0.0


def test_two_blobs_learnable():
    e, truth = blobs(2000, 2, 20.0, m=8)
    assert prequential_knn(e, truth).cl >= 0.99


def test_codelength_matches_hand_computation():
    # history: one neighbor with the same label each time, K = 2 labels overall
    x = np.arange(6, dtype=float)[:, None]
    labels = np.array([0, 0, 0, 1, 1, 1])
    cfg = PrequentialConfig(n_neighbors=1, chunk_size=6, seed=0, smoothing=1.0)
    order = np.random.default_rng(0).permutation(6)
    xs, ys = x[order, 0], labels[order]
    expected = 0.0
    for i in range(1, 6):
        j = min(range(i), key=lambda j: (abs(xs[j] - xs[i]), j))
        hit = int(ys[j] == ys[i])
        expected -= np.log((hit + 1.0) / (1 + 2.0))
    res = prequential_knn(x, labels, "euclidean", cfg)
    assert res.codelength == pytest.approx(expected, rel=1e-14)
    assert res.n_predictions == 5


def test_codelength_vanishes_with_tiny_smoothing():
    x = np.random.default_rng(1).standard_normal((50, 2))
    res = prequential_knn(x, np.zeros(50, dtype=int), cfg=PrequentialConfig(smoothing=1e-12))
    assert res.codelength < 1e-9


def test_label_permutation_invariant():
    e, truth = blobs(600, 6, 4.0, m=8)
    perm = np.array([3, 5, 0, 1, 4, 2])
    a, b = prequential_knn(e, truth), prequential_knn(e, perm[truth])
    assert a.cl == b.cl
    assert a.codelength == b.codelength


def test_errors():
    x = np.eye(3)
    with pytest.raises(LabelLengthMismatch):
        prequential_knn(x, [0, 1])
    with pytest.raises(EmptyAfterChunking):
        prequential_knn(np.ones((1, 2)), [0])
    with pytest.raises(InvalidConfig):
        PrequentialConfig(chunk_size=1)
    with pytest.raises(InvalidConfig):
        PrequentialConfig(smoothing=0.0)


def test_last_short_chunk_dropped():
    x = np.random.default_rng(2).standard_normal((11, 2))
    res = prequential_knn(x, np.zeros(11, dtype=int), cfg=PrequentialConfig(chunk_size=5))
    assert res.per_chunk_accuracy.size == 2
    assert res.n_predictions == 8


def test_resolve_clusters():
    assert resolve_clusters("auto", 4096) == 64
    assert resolve_clusters("sqrt", 10) == 4
    assert resolve_clusters("0.01", 2000) == 20
    assert resolve_clusters("0.001", 2000) == 2
    assert resolve_clusters("1%", 2000) == 20
    assert resolve_clusters("7", 2000) == 7
    assert resolve_clusters(0.1, 2000) == 200


@pytest.mark.slow
def test_cluster_learnability_blobs_and_noise():
    e, _ = blobs(4096, 64, 20.0)
    res = cluster_learnability(e)
    assert res.n_clusters == 64
    assert res.cl >= 0.95
    noise = np.random.default_rng(3).standard_normal((4096, 64))
    assert cluster_learnability(noise).cl <= 0.5


def test_invariances():
    e, _ = blobs(500, 8, 5.0, m=6, seed=5)
    x = e.as_float64()
    rng = np.random.default_rng(6)
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    base = cluster_learnability(x, "euclidean", 10)
    moved = cluster_learnability(x @ q.T + 2.0, "euclidean", 10)
    assert base.cl == moved.cl
    cos = cluster_learnability(x, "cosine", 10)
    assert cos.cl == cluster_learnability(x * rng.uniform(0.5, 4.0, (500, 1)), "cosine", 10).cl


def test_deterministic():
    x = np.random.default_rng(7).standard_normal((400, 5))
    a, b = cluster_learnability(x), cluster_learnability(x)
    assert a.cl == b.cl and a.codelength == b.codelength
    np.testing.assert_array_equal(a.per_chunk_accuracy, b.per_chunk_accuracy)
