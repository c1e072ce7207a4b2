"""Intrinsic-dimension and entropy estimators built on nearest-neighbor distances."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from clid.embeddings import ZERO_NORM, Metric, NeighborTable, as_embedding_set, knn_query
from clid.errors import (
    DegenerateRatios,
    DuplicatePointsWarning,
    InvalidConfig,
    NumericOverflow,
    TooFewPoints,
    ZeroDistance,
)

DEFAULT_DISCARD = 0.1
DEFAULT_MLE_K = 20


@dataclass(frozen=True)
class TwoNNFit:
    """Result of a TwoNN fit.

    Attributes:
        mu: ratios of second to first neighbor distance, sorted ascending.
        f_emp: empirical cdf ``i / N`` of the points used in the regression.
        id: slope of the zero-intercept fit, the dimension estimate.
        n_used: number of points in the regression.
        discard_fraction: fraction of the largest ratios dropped.
        n_duplicates: rows dropped because their first neighbor coincides.
    """

    mu: np.ndarray
    f_emp: np.ndarray
    id: float
    n_used: int
    discard_fraction: float
    n_duplicates: int = 0


def twonn_fit_from_ratios(mu, discard_fraction: float = DEFAULT_DISCARD) -> TwoNNFit:
    """Fit the Pareto cdf of neighbor-distance ratios by a line through the origin.

    After sorting, the ``ceil(discard_fraction * N)`` largest ratios are
    dropped and the remaining points ``(log mu_i, -log(1 - i/N))`` are
    regressed with zero intercept. A point whose empirical cdf equals one
    has no finite ordinate and is left out of the regression.
    """
    if not 0.0 <= discard_fraction < 1.0:
        raise InvalidConfig(f"discard_fraction must lie in [0, 1), got {discard_fraction}")
    mu = np.sort(np.asarray(mu, dtype=np.float64).ravel())
    if mu.size and (not np.all(np.isfinite(mu)) or mu[0] < 1.0):
        raise ValueError("ratios must be finite and >= 1")
    n = mu.size
    keep = n - math.ceil(discard_fraction * n)
    if keep < 2:
        raise TooFewPoints(f"{keep} ratios remain after discarding, need 2", n=n)
    f = np.arange(1, keep + 1) / n
    usable = f < 1.0
    x = np.log(mu[:keep][usable])
    y = -np.log1p(-f[usable])
    sxx = float(x @ x)
    if sxx == 0.0:
        raise DegenerateRatios("all retained ratios equal 1")
    return TwoNNFit(
        mu=mu,
        f_emp=f[usable],
        id=float(x @ y) / sxx,
        n_used=int(usable.sum()),
        discard_fraction=float(discard_fraction),
    )


def twonn_id(e, metric: Metric | str = Metric.EUCLIDEAN, discard_fraction: float = DEFAULT_DISCARD) -> TwoNNFit:
    """TwoNN intrinsic dimension of an embedding set.

    Rows whose first neighbor lies at distance below ``1e-12`` are treated
    as duplicates and dropped (a :class:`DuplicatePointsWarning` is issued).
    """
    e = as_embedding_set(e)
    metric = Metric.parse(metric)
    if e.n < 3:
        raise TooFewPoints(f"TwoNN needs at least 3 points, got {e.n}", n=e.n)
    r = knn_query(e, 2, metric).radial()
    ok = r[:, 0] >= ZERO_NORM
    n_dup = int((~ok).sum())
    if ok.sum() < 3:
        raise TooFewPoints(f"only {int(ok.sum())} non-duplicate points", n=e.n)
    if n_dup:
        warnings.warn(f"dropped {n_dup} duplicate points", DuplicatePointsWarning, stacklevel=2)
    fit = twonn_fit_from_ratios(r[ok, 1] / r[ok, 0], discard_fraction)
    return TwoNNFit(fit.mu, fit.f_emp, fit.id, fit.n_used, fit.discard_fraction, n_dup)


@dataclass(frozen=True)
class LocalIdEstimate:
    """Per-point maximum-likelihood dimension and the derived density/entropy.

    ``local_id`` and ``log_density`` are NaN at excluded points (``valid``
    is False there). ``density_dim`` is the dimension plugged into the
    density formula at each valid point; ``entropy`` is None unless the
    estimate came from :func:`knn_entropy`.
    """

    local_id: np.ndarray
    global_id: float
    k: int
    valid: np.ndarray
    t_k: np.ndarray
    pooling: str = "mean"
    log_density: np.ndarray | None = None
    density_dim: np.ndarray | None = None
    entropy: float | None = None

    @property
    def n_excluded(self) -> int:
        return int((~self.valid).sum())


def _pool(local: np.ndarray, pooling: str) -> float:
    if pooling == "mean":
        return float(np.mean(local))
    if pooling == "harmonic":
        return float(1.0 / np.mean(1.0 / local))
    raise InvalidConfig(f"unknown pooling {pooling!r}")


def mle_local_id(table: NeighborTable, k: int = DEFAULT_MLE_K, pooling: str = "mean") -> LocalIdEstimate:
    """Local dimension ``[1/(k-1) sum_j log(T_k / T_j)]^-1`` over ``j < k``.

    Points with a zero distance among their first ``k`` neighbors, or with
    ``T_k == T_1``, are excluded. ``pooling`` selects the arithmetic mean
    (default) or the harmonic mean of the local estimates.
    """
    if k < 2:
        raise InvalidConfig(f"k must be >= 2, got {k}")
    if table.k < k:
        raise InvalidConfig(f"table has {table.k} neighbor columns, need {k}")
    t = table.radial()[:, :k]
    valid = (t[:, 0] > 0.0) & (t[:, -1] > t[:, 0])
    if not valid.any():
        raise ZeroDistance("every point has zero or constant neighbor distances")
    local = np.full(t.shape[0], np.nan)
    tv = t[valid]
    local[valid] = (k - 1) / np.sum(np.log(tv[:, -1:] / tv[:, :-1]), axis=1)
    return LocalIdEstimate(
        local_id=local,
        global_id=_pool(local[valid], pooling),
        k=k,
        valid=valid,
        t_k=t[:, -1].copy(),
        pooling=pooling,
    )


def log_unit_ball_volume(dim) -> np.ndarray:
    """``log(pi^(D/2) / Gamma(D/2 + 1))`` for real, possibly fractional, ``D``."""
    dim = np.asarray(dim, dtype=np.float64)
    return 0.5 * dim * math.log(math.pi) - gammaln(0.5 * dim + 1.0)


def knn_entropy(
    e,
    k: int = DEFAULT_MLE_K,
    metric: Metric | str = Metric.EUCLIDEAN,
    pooling: str = "harmonic",
) -> LocalIdEstimate:
    """Differential entropy from the local-dimension density model.

    The log density at each point is
    ``log(k - 1) - log N - D log T_k - log V(D)``, and the entropy is the
    negated mean. With ``pooling="local"`` the point's own ``D_hat(x, k)``
    is used as ``D``; with ``"harmonic"`` (default) or ``"mean"`` one pooled
    dimension is shared by all points, which removes the variance of the
    per-point estimate from the density term.
    """
    e = as_embedding_set(e)
    metric = Metric.parse(metric)
    if e.n <= k:
        raise TooFewPoints(f"need more than k={k} points, got {e.n}", n=e.n)
    est = mle_local_id(knn_query(e, k, metric), k, pooling="harmonic" if pooling == "harmonic" else "mean")
    valid = est.valid
    if pooling == "local":
        dim = est.local_id[valid]
    elif pooling in ("harmonic", "mean"):
        dim = np.full(int(valid.sum()), est.global_id)
    else:
        raise InvalidConfig(f"unknown pooling {pooling!r}")
    log_v = log_unit_ball_volume(dim)
    if not np.all(np.isfinite(log_v)):
        raise NumericOverflow("unit-ball log-volume is not finite")
    log_f = np.full(e.n, np.nan)
    log_f[valid] = math.log(k - 1) - math.log(e.n) - dim * np.log(est.t_k[valid]) - log_v
    entropy = -float(np.mean(log_f[valid]))
    if not math.isfinite(entropy):
        raise NumericOverflow("entropy is not finite")
    density_dim = np.full(e.n, np.nan)
    density_dim[valid] = dim
    return LocalIdEstimate(
        local_id=est.local_id,
        global_id=est.global_id,
        k=k,
        valid=valid,
        t_k=est.t_k,
        pooling=pooling,
        log_density=log_f,
        density_dim=density_dim,
        entropy=entropy,
    )
