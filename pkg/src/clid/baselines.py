"""Competing label-free metrics: alignment/uniformity, coding rate reduction, pretext KNN."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from clid.embeddings import EmbeddingSet, Metric, _unit_rows, as_embedding_set, cross_knn
from clid.errors import (
    InvalidConfig,
    KTooLarge,
    LabelLengthMismatch,
    NonFiniteLogDet,
    ShapeMismatch,
    TooFewPoints,
)
from clid.kmeans import Partition
from clid.learnability import _vote

DEFAULT_PAIR_BUDGET = 1_000_000


@dataclass(frozen=True)
class AlignUnifParams:
    alpha: float = 2.0
    t: float = 2.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.t > 0):
            raise InvalidConfig("alpha and t must be positive")


@dataclass(frozen=True)
class CodingRateParams:
    eps_sq: float = 0.5

    def __post_init__(self):
        if not self.eps_sq > 0:
            raise InvalidConfig("eps_sq must be positive")


@dataclass(frozen=True, eq=False)
class PairedEmbeddings:
    """Two views of the same inputs; row ``i`` of each comes from one input."""

    view_a: EmbeddingSet
    view_b: EmbeddingSet

    def __post_init__(self):
        a, b = as_embedding_set(self.view_a), as_embedding_set(self.view_b)
        if a.data.shape != b.data.shape:
            raise ShapeMismatch(f"views have shapes {a.data.shape} and {b.data.shape}")
        object.__setattr__(self, "view_a", a)
        object.__setattr__(self, "view_b", b)


def alignment_loss(p: PairedEmbeddings, params: AlignUnifParams | None = None, normalize: bool = True) -> float:
    """Mean ``||a_i - b_i||^alpha`` over paired rows, on unit rows by default."""
    params = params or AlignUnifParams()
    a, b = p.view_a.as_float64(), p.view_b.as_float64()
    if normalize:
        a, b = _unit_rows(a), _unit_rows(b)
    diff = a - b
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return float(np.mean(dist**params.alpha))


@dataclass(frozen=True)
class UniformityResult:
    value: float
    n_pairs: int
    exact: bool


def uniformity(
    e,
    params: AlignUnifParams | None = None,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
    exact: bool = False,
) -> UniformityResult:
    """``log mean exp(-t ||z_i - z_j||^2)`` over distinct pairs of unit rows.

    Above ``pair_budget`` distinct pairs, ``pair_budget`` pairs ``i != j``
    are drawn uniformly with ``seed`` unless ``exact`` is set.
    """
    params = params or AlignUnifParams()
    e = as_embedding_set(e)
    if e.n < 2:
        raise TooFewPoints("uniformity needs at least 2 rows", n=e.n)
    z = _unit_rows(e.as_float64())
    n_all = e.n * (e.n - 1) // 2
    if exact or n_all <= pair_budget:
        parts = []
        block = max(1, (1 << 22) // e.n)
        for start in range(0, e.n - 1, block):
            stop = min(e.n - 1, start + block)
            g = z[start:stop] @ z.T
            sq = np.maximum(2.0 - 2.0 * g, 0.0)
            rows = np.arange(start, stop)[:, None]
            upper = np.arange(e.n)[None, :] > rows
            parts.append(logsumexp(-params.t * sq[upper]))
        return UniformityResult(float(logsumexp(parts) - math.log(n_all)), n_all, True)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, e.n, size=pair_budget)
    j = rng.integers(0, e.n - 1, size=pair_budget)
    j = np.where(j >= i, j + 1, j)
    sq = np.maximum(2.0 - 2.0 * np.einsum("ij,ij->i", z[i], z[j]), 0.0)
    return UniformityResult(float(logsumexp(-params.t * sq) - math.log(pair_budget)), pair_budget, False)


def uniformity_loss(e, params: AlignUnifParams | None = None, **kwargs) -> float:
    return uniformity(e, params, **kwargs).value


def contrastive_score(p: PairedEmbeddings, params: AlignUnifParams | None = None, **kwargs) -> float:
    """Negative contrastive loss ``-L_align - L_unif``; higher predicts better.

    Uniformity is measured on ``view_a``.
    """
    return -(alignment_loss(p, params) + uniformity_loss(p.view_a, params, **kwargs))


def _logdet_spd(a: np.ndarray) -> float:
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NonFiniteLogDet(f"matrix is not positive definite: {exc}") from None
    val = 2.0 * float(np.sum(np.log(np.diag(chol))))
    if not math.isfinite(val):
        raise NonFiniteLogDet("log-determinant is not finite")
    return val


def _rate(x: np.ndarray, n_scale: int, eps_sq: float) -> float:
    # logdet(I + (m / (n eps^2)) Z Z^T) with Z = x^T, factored on the m x m side
    m = x.shape[1]
    gram = (m / (n_scale * eps_sq)) * (x.T @ x)
    gram[np.diag_indices(m)] += 1.0
    return _logdet_spd(gram)


def coding_rate(e, params: CodingRateParams | None = None) -> float:
    """``1/2 logdet(I + m/(N eps^2) Z Z^T)`` for the rows as given."""
    params = params or CodingRateParams()
    x = as_embedding_set(e).as_float64()
    return 0.5 * _rate(x, x.shape[0], params.eps_sq)


def _labels_of(part, n: int) -> np.ndarray:
    labels = np.asarray(part.labels if isinstance(part, Partition) else part)
    if labels.ndim != 1 or labels.shape[0] != n:
        raise LabelLengthMismatch(f"{labels.size} labels for {n} rows")
    return labels


def coding_rate_conditional(e, part, params: CodingRateParams | None = None) -> float:
    """``sum_j N_j/(2N) logdet(I + m/(N_j eps^2) Z_j Z_j^T)`` over the clusters of ``part``."""
    params = params or CodingRateParams()
    x = as_embedding_set(e).as_float64()
    n = x.shape[0]
    labels = _labels_of(part, n)
    # visit clusters by first row so the sum does not depend on label values
    uniq, first = np.unique(labels, return_index=True)
    total = 0.0
    for lab in uniq[np.argsort(first)]:
        xj = x[labels == lab]
        total += xj.shape[0] / (2.0 * n) * _rate(xj, xj.shape[0], params.eps_sq)
    return total


@dataclass(frozen=True)
class RateReduction:
    r: float
    r_c: float
    delta_r: float


def rate_reduction(e, part, params: CodingRateParams | None = None) -> RateReduction:
    """Coding rates of the unit-normalized rows and their difference."""
    z = _unit_rows(as_embedding_set(e).as_float64())
    r = coding_rate(z, params)
    rc = coding_rate_conditional(z, part, params)
    return RateReduction(r, rc, r - rc)


def mcr2_delta(e, part, params: CodingRateParams | None = None) -> float:
    return rate_reduction(e, part, params).delta_r


def pretext_knn_accuracy(train, train_labels, test, test_labels, k: int = 1, metric: Metric | str = Metric.COSINE) -> float:
    """Majority-vote KNN accuracy of ``test`` labels predicted from ``train``."""
    train, test = as_embedding_set(train), as_embedding_set(test)
    train_labels = np.asarray(train_labels)
    test_labels = np.asarray(test_labels)
    if train_labels.shape != (train.n,) or test_labels.shape != (test.n,):
        raise ShapeMismatch("label vectors must match row counts")
    if k > train.n:
        raise KTooLarge(f"k={k} exceeds {train.n} training rows", k=k, n=train.n)
    classes, codes = np.unique(np.concatenate([train_labels, test_labels]), return_inverse=True)
    tr, te = codes[: train.n], codes[train.n :]
    table = cross_knn(test, train, k, metric)
    pred, _ = _vote(tr[table.indices], np.full(test.n, k), classes.size)
    return float(np.mean(pred == te))
