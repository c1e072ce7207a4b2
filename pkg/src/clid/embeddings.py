"""Embedding containers, distance metrics and exact nearest-neighbor search."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from clid.errors import InvalidEmbedding, KTooLarge, ShapeMismatch, ZeroNormRow

ZERO_NORM = 1e-12
# caps the size of one block of the query x reference distance matrix
_BLOCK_ELEMENTS = 1 << 22


class Metric(str, enum.Enum):
    """Distance used for neighbor search.

    ``COSINE`` is ``2 - 2 cos(a, b)``, which equals the squared Euclidean
    distance between the unit-normalized rows.
    """

    EUCLIDEAN = "euclidean"
    COSINE = "cosine"

    @classmethod
    def parse(cls, value: "Metric | str") -> "Metric":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown metric {value!r}; expected 'euclidean' or 'cosine'") from None


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """An ``N x m`` matrix of representation vectors, one sample per row.

    The stored array keeps its dtype (float32 files stay float32); every
    computation upcasts to float64.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidEmbedding(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(np.float64)
        bad = ~np.isfinite(arr)
        if bad.any():
            row, col = map(int, np.argwhere(bad)[0])
            raise InvalidEmbedding(f"non-finite value at row {row}, col {col}", row=row, col=col)
        arr = np.array(arr, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.n

    def as_float64(self) -> np.ndarray:
        return np.asarray(self.data, dtype=np.float64)


def as_embedding_set(x) -> EmbeddingSet:
    return x if isinstance(x, EmbeddingSet) else EmbeddingSet(np.asarray(x))


@dataclass(frozen=True, eq=False)
class NeighborTable:
    """Sorted nearest neighbors of every row, self excluded.

    ``distances[i, j]`` is the metric value between row ``i`` and its
    ``(j+1)``-th nearest neighbor ``indices[i, j]``. Equidistant candidates
    are ordered by row index.
    """

    indices: np.ndarray
    distances: np.ndarray
    metric: Metric

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def radial(self) -> np.ndarray:
        """Distances as a proper metric: the chord length for cosine."""
        if self.metric is Metric.COSINE:
            return np.sqrt(self.distances)
        return self.distances


def _sq_rows(x: np.ndarray) -> np.ndarray:
    # plain elementwise square and sum, matching a textbook loop bit for bit
    return np.sum(x * x, axis=1)


def _row_norms(x: np.ndarray) -> np.ndarray:
    return np.sqrt(_sq_rows(x))


def normalize_rows(e) -> EmbeddingSet:
    """Scale every row to unit Euclidean norm.

    Raises:
        ZeroNormRow: if some row has norm below ``1e-12``.
    """
    x = as_embedding_set(e).as_float64()
    return EmbeddingSet(_unit_rows(x))


def _unit_rows(x: np.ndarray) -> np.ndarray:
    norms = _row_norms(x)
    small = np.flatnonzero(norms < ZERO_NORM)
    if small.size:
        i = int(small[0])
        raise ZeroNormRow(f"row {i} has zero norm", row=i)
    return x / norms[:, None]


def prepare(x: np.ndarray, metric: Metric) -> np.ndarray:
    """Float64 copy of ``x`` in the space where the metric is squared-Euclidean based."""
    x = np.asarray(x, dtype=np.float64)
    return _unit_rows(x) if metric is Metric.COSINE else x


def distance(a, b, metric: Metric | str = Metric.EUCLIDEAN) -> float:
    """Metric value between two vectors."""
    metric = Metric.parse(metric)
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if metric is Metric.COSINE:
        a, b = _unit_rows(np.stack([a, b]))
        diff = a - b
        return float(diff @ diff)
    diff = a - b
    return float(np.sqrt(diff @ diff))


def search(
    query: np.ndarray,
    ref: np.ndarray,
    k: int,
    metric: Metric,
    *,
    self_offset: int | None = None,
    causal: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact k-NN of prepared ``query`` rows among prepared ``ref`` rows.

    Candidates are preselected on a GEMM-based squared distance with a
    rounding margin, then re-ranked on directly computed distances so the
    result matches a full brute-force sort, ties going to the lower index.

    Args:
        query, ref: outputs of :func:`prepare`.
        k: neighbors per query.
        metric: distance kind.
        self_offset: query row ``i`` is ref row ``i + self_offset`` and is
            excluded from its own neighbors.
        causal: with ``self_offset`` set, query row ``i`` only sees ref rows
            ``j < i + self_offset`` (prequential history).

    Returns:
        ``(indices, distances)`` of shape ``(n_query, k)``; slots without a
        valid neighbor hold ``-1`` and ``inf``.
    """
    nq, nr = query.shape[0], ref.shape[0]
    idx_out = np.full((nq, k), -1, dtype=np.int64)
    dist_out = np.full((nq, k), np.inf)
    if k == 0 or nr == 0:
        return idx_out, dist_out
    rr = np.einsum("ij,ij->i", ref, ref)
    qq = np.einsum("ij,ij->i", query, query)
    # forward error bound of the expanded squared distance
    tol_scale = 16.0 * (query.shape[1] + 2) * np.finfo(np.float64).eps
    block = max(1, _BLOCK_ELEMENTS // nr)
    cols = np.arange(nr)
    for start in range(0, nq, block):
        stop = min(nq, start + block)
        approx = qq[start:stop, None] + rr[None, :] - 2.0 * (query[start:stop] @ ref.T)
        np.maximum(approx, 0.0, out=approx)
        if self_offset is not None:
            own = np.arange(start, stop) + self_offset
            if causal:
                approx[cols[None, :] >= own[:, None]] = np.inf
            else:
                approx[np.arange(stop - start), own] = np.inf
        kk = min(k, nr)
        kth = np.partition(approx, kk - 1, axis=1)[:, kk - 1]
        margin = tol_scale * (qq[start:stop] + rr.max())
        for r in range(stop - start):
            row = approx[r]
            cand = np.flatnonzero(row <= kth[r] + margin[r])
            cand = cand[np.isfinite(row[cand])]
            if cand.size == 0:
                continue
            diff = ref[cand] - query[start + r]
            d = _sq_rows(diff)
            if metric is Metric.EUCLIDEAN:
                d = np.sqrt(d)
            order = np.lexsort((cand, d))[:k]
            idx_out[start + r, : order.size] = cand[order]
            dist_out[start + r, : order.size] = d[order]
    return idx_out, dist_out


def knn_query(e, k: int, metric: Metric | str = Metric.EUCLIDEAN) -> NeighborTable:
    """Exact k nearest neighbors of every row among the other rows."""
    e = as_embedding_set(e)
    metric = Metric.parse(metric)
    if k < 1:
        raise ValueError("k must be positive")
    if k >= e.n:
        raise KTooLarge(f"k={k} requires at least {k + 1} rows, got {e.n}", k=k, n=e.n)
    x = prepare(e.data, metric)
    idx, dist = search(x, x, k, metric, self_offset=0)
    for arr in (idx, dist):
        arr.setflags(write=False)
    return NeighborTable(idx, dist, metric)


def cross_knn(query, ref, k: int, metric: Metric | str = Metric.EUCLIDEAN) -> NeighborTable:
    """Nearest rows of ``ref`` for each row of ``query`` (no self exclusion)."""
    query, ref = as_embedding_set(query), as_embedding_set(ref)
    metric = Metric.parse(metric)
    if query.m != ref.m:
        raise ShapeMismatch(f"query has {query.m} columns, reference has {ref.m}")
    if k < 1:
        raise ValueError("k must be positive")
    if k > ref.n:
        raise KTooLarge(f"k={k} exceeds reference size {ref.n}", k=k, n=ref.n)
    idx, dist = search(prepare(query.data, metric), prepare(ref.data, metric), k, metric)
    return NeighborTable(idx, dist, metric)
