"""Lloyd K-means with k-means++ seeding; spherical variant for the cosine metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from clid.embeddings import Metric, as_embedding_set, prepare
from clid.errors import KOutOfRange

DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-4


@dataclass(frozen=True)
class Partition:
    """Cluster assignment of the rows of an embedding set.

    Attributes:
        labels: cluster id in ``[0, k)`` per row; every cluster is non-empty.
        k: number of clusters.
        centroids: ``k x m`` centroid matrix (unit rows for spherical runs).
        inertia: summed squared-Euclidean (or ``2 - 2 cos``) distance of each
            point to its centroid.
        n_iter: Lloyd iterations executed.
        inertia_history: inertia after each iteration.
    """

    labels: np.ndarray
    k: int
    centroids: np.ndarray
    inertia: float
    n_iter: int
    inertia_history: tuple = ()


def _sq_dists(x: np.ndarray, x_sq: np.ndarray, c: np.ndarray) -> np.ndarray:
    d = x_sq[:, None] + np.einsum("ij,ij->i", c, c)[None, :] - 2.0 * (x @ c.T)
    return np.maximum(d, 0.0, out=d)


def _point_cost(x: np.ndarray, c: np.ndarray, labels: np.ndarray) -> np.ndarray:
    diff = x - c[labels]
    return np.einsum("ij,ij->i", diff, diff)


def _plusplus(x: np.ndarray, x_sq: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(x, x_sq, x[chosen[0]][None, :])[:, 0]
    closest[chosen[0]] = 0.0
    taken = np.zeros(n, dtype=bool)
    taken[chosen[0]] = True
    for _ in range(1, k):
        total = closest.sum()
        if total > 0.0:
            nxt = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            nxt = min(nxt, n - 1)
            if taken[nxt]:
                nxt = int(np.flatnonzero(~taken)[0])
        else:
            # every remaining point coincides with a center
            nxt = int(rng.choice(np.flatnonzero(~taken)))
        chosen.append(nxt)
        taken[nxt] = True
        np.minimum(closest, _sq_dists(x, x_sq, x[nxt][None, :])[:, 0], out=closest)
        closest[nxt] = 0.0
    return x[chosen].copy()


def _repair_empty(labels: np.ndarray, cost: np.ndarray, k: int) -> np.ndarray:
    """Move the farthest point of a multi-member cluster into each empty cluster."""
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        p = int(np.argmax(np.where(movable, cost, -1.0)))
        counts[labels[p]] -= 1
        labels[p] = j
        counts[j] = 1
        cost[p] = 0.0
    return labels


def _update(x: np.ndarray, labels: np.ndarray, k: int, prev: np.ndarray, spherical: bool) -> np.ndarray:
    sums = np.zeros((k, x.shape[1]))
    np.add.at(sums, labels, x)
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    cent = sums / counts[:, None]
    if spherical:
        norms = np.sqrt(np.einsum("ij,ij->i", cent, cent))
        zero = norms < 1e-12
        cent[~zero] /= norms[~zero, None]
        # any unit vector is optimal for a cluster whose members cancel out
        cent[zero] = prev[zero]
    return cent


def kmeans(
    e,
    k: int,
    metric: Metric | str = Metric.EUCLIDEAN,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> Partition:
    """Cluster rows into ``k`` groups.

    Uses k-means++ seeding from ``seed`` and Lloyd iterations until the mean
    centroid displacement drops below ``tol`` or ``max_iter`` is reached.
    With ``Metric.COSINE`` the rows and centroids are kept on the unit
    sphere (spherical K-means). Empty clusters are refilled with the point
    farthest from its current centroid.
    """
    e = as_embedding_set(e)
    metric = Metric.parse(metric)
    if not 1 <= k <= e.n:
        raise KOutOfRange(f"k={k} outside [1, {e.n}]", k=k, n=e.n)
    spherical = metric is Metric.COSINE
    x = prepare(e.data, metric)
    x_sq = np.einsum("ij,ij->i", x, x)
    rng = np.random.default_rng(seed)
    cent = _plusplus(x, x_sq, k, rng)
    history = []
    labels = np.zeros(e.n, dtype=np.int64)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        labels = np.argmin(_sq_dists(x, x_sq, cent), axis=1)
        labels = _repair_empty(labels, _point_cost(x, cent, labels), k)
        new = _update(x, labels, k, cent, spherical)
        history.append(float(_point_cost(x, new, labels).sum()))
        shift = float(np.mean(np.sqrt(np.einsum("ij,ij->i", new - cent, new - cent))))
        cent = new
        if shift < tol:
            break
    labels.setflags(write=False)
    cent.setflags(write=False)
    return Partition(
        labels=labels,
        k=k,
        centroids=cent,
        inertia=history[-1],
        n_iter=n_iter,
        inertia_history=tuple(history),
    )
