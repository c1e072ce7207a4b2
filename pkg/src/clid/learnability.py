"""Cluster learnability: online KNN accuracy on K-means pseudo-labels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from clid.embeddings import Metric, as_embedding_set, prepare, search
from clid.errors import EmptyAfterChunking, InvalidConfig, LabelLengthMismatch
from clid.kmeans import DEFAULT_MAX_ITER, DEFAULT_TOL, kmeans


@dataclass(frozen=True)
class PrequentialConfig:
    """Settings of the online KNN learner.

    ``chunk_size`` bounds the history a prediction can see; the first point
    of every chunk is never scored.
    """

    n_neighbors: int = 1
    chunk_size: int = 10_000
    seed: int = 0
    smoothing: float = 1.0

    def __post_init__(self):
        if self.n_neighbors < 1:
            raise InvalidConfig("n_neighbors must be >= 1")
        if self.chunk_size < 2:
            raise InvalidConfig("chunk_size must be >= 2")
        if not self.smoothing > 0:
            raise InvalidConfig("smoothing must be > 0")


@dataclass(frozen=True)
class PrequentialResult:
    cl: float
    codelength: float
    per_chunk_accuracy: np.ndarray
    n_predictions: int
    n_clusters: int | None = None
    provenance: dict = field(default_factory=dict)


def _vote(neighbor_labels: np.ndarray, n_valid: np.ndarray, n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    """Majority label per row (ties to the smallest label) and the vote counts."""
    rows, k = neighbor_labels.shape
    counts = np.zeros((rows, n_classes), dtype=np.int64)
    slot_ok = np.arange(k)[None, :] < n_valid[:, None]
    r_idx = np.broadcast_to(np.arange(rows)[:, None], (rows, k))
    np.add.at(counts, (r_idx[slot_ok], neighbor_labels[slot_ok]), 1)
    return np.argmax(counts, axis=1), counts


def prequential_knn(e, labels, metric: Metric | str = Metric.COSINE, cfg: PrequentialConfig | None = None) -> PrequentialResult:
    """Online accuracy and codelength of a KNN learner over seeded chunks.

    Rows are shuffled with ``cfg.seed`` and cut into consecutive chunks.
    Inside a chunk the ``i``-th point is predicted from the up to
    ``n_neighbors`` nearest points before it; chunk accuracies are averaged.
    The codelength sums ``-log p`` over scored points, where ``p`` is the
    Laplace-smoothed neighbor vote share of the true label.
    """
    cfg = cfg or PrequentialConfig()
    e = as_embedding_set(e)
    metric = Metric.parse(metric)
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != e.n:
        raise LabelLengthMismatch(f"{labels.shape[0] if labels.ndim else 0} labels for {e.n} rows")
    # dense 0..K-1 codes; K counts distinct labels
    classes, codes = np.unique(labels, return_inverse=True)
    n_classes = classes.size
    order = np.random.default_rng(cfg.seed).permutation(e.n)
    x = prepare(e.data, metric)[order]
    y = codes[order]

    accs, total_bits, n_pred = [], 0.0, 0
    for start in range(0, e.n, cfg.chunk_size):
        xc = x[start : start + cfg.chunk_size]
        yc = y[start : start + cfg.chunk_size]
        c = xc.shape[0]
        if c < 2:
            continue
        idx, _ = search(xc[1:], xc, cfg.n_neighbors, metric, self_offset=1, causal=True)
        n_valid = np.minimum(np.arange(1, c), cfg.n_neighbors)
        nb_labels = np.where(idx >= 0, yc[np.maximum(idx, 0)], 0)
        pred, counts = _vote(nb_labels, n_valid, n_classes)
        truth = yc[1:]
        accs.append(float(np.mean(pred == truth)))
        hits = counts[np.arange(c - 1), truth]
        p = (hits + cfg.smoothing) / (n_valid + cfg.smoothing * n_classes)
        total_bits -= float(np.sum(np.log(p)))
        n_pred += c - 1
    if not accs:
        raise EmptyAfterChunking(f"no chunk of size >= 2 from {e.n} rows with chunk_size={cfg.chunk_size}")
    per_chunk = np.asarray(accs)
    return PrequentialResult(
        cl=float(np.mean(per_chunk)),
        codelength=total_bits,
        per_chunk_accuracy=per_chunk,
        n_predictions=n_pred,
        n_clusters=n_classes,
    )


def auto_clusters(n: int) -> int:
    return max(1, math.ceil(math.sqrt(n)))


def resolve_clusters(spec, n: int) -> int:
    """Cluster count from ``"auto"``/``"sqrt"``, an integer, or a ratio in (0, 1).

    Strings containing a dot (and floats) are read as a fraction of ``n``.
    """
    if isinstance(spec, str):
        s = spec.strip().lower()
        if s in ("auto", "sqrt"):
            return auto_clusters(n)
        if s.endswith("%"):
            return max(1, math.ceil(float(s[:-1]) / 100.0 * n))
        spec = float(s) if "." in s or "e" in s else int(s)
    if isinstance(spec, float):
        if not 0.0 < spec <= 1.0:
            raise InvalidConfig(f"cluster ratio must lie in (0, 1], got {spec}")
        return max(1, math.ceil(spec * n))
    return int(spec)


def cluster_learnability(
    e,
    metric: Metric | str = Metric.COSINE,
    n_clusters="auto",
    cfg: PrequentialConfig | None = None,
    kmeans_seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> PrequentialResult:
    """K-means pseudo-labels (``ceil(sqrt(N))`` clusters by default) scored by :func:`prequential_knn`."""
    cfg = cfg or PrequentialConfig()
    e = as_embedding_set(e)
    metric = Metric.parse(metric)
    k = resolve_clusters(n_clusters, e.n)
    part = kmeans(e, k, metric, seed=kmeans_seed, max_iter=max_iter, tol=tol)
    res = prequential_knn(e, part.labels, metric, cfg)
    prov = {
        "n_clusters": k,
        "kmeans_seed": kmeans_seed,
        "kmeans_iterations": part.n_iter,
        "max_iter": max_iter,
        "tol": tol,
        "n_neighbors": cfg.n_neighbors,
        "chunk_size": cfg.chunk_size,
        "permutation_seed": cfg.seed,
        "smoothing": cfg.smoothing,
        "metric": metric.value,
    }
    return PrequentialResult(res.cl, res.codelength, res.per_chunk_accuracy, res.n_predictions, k, prov)
