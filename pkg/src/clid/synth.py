"""Synthetic datasets with known intrinsic dimension or cluster structure."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from clid.embeddings import EmbeddingSet
from clid.errors import DimMismatch, InvalidConfig


class SynthKind(str, enum.Enum):
    HYPERCUBE = "hypercube"
    BLOBS = "blobs"
    SUBSPACE = "subspace"


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic dataset.

    For blobs, ``intrinsic_dim`` is the dimension of the shared subspace the
    within-blob noise lives in (``None`` means the full ambient space).
    """

    kind: SynthKind = SynthKind.HYPERCUBE
    n: int = 1000
    intrinsic_dim: int | None = 2
    ambient_dim: int = 64
    n_blobs: int = 2
    separation: float = 20.0
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", SynthKind(self.kind))
        if self.n < 1:
            raise InvalidConfig("n must be >= 1")
        if self.ambient_dim < 1:
            raise InvalidConfig("ambient_dim must be >= 1")
        if self.intrinsic_dim is not None:
            if self.intrinsic_dim < 1:
                raise InvalidConfig("intrinsic_dim must be >= 1")
            if self.intrinsic_dim > self.ambient_dim:
                raise DimMismatch(
                    f"intrinsic_dim {self.intrinsic_dim} > ambient_dim {self.ambient_dim}",
                    intrinsic_dim=self.intrinsic_dim,
                    ambient_dim=self.ambient_dim,
                )
        if not self.sigma > 0:
            raise InvalidConfig("sigma must be > 0")
        if self.separation < 0:
            raise InvalidConfig("separation must be >= 0")
        if self.n_blobs < 1:
            raise InvalidConfig("n_blobs must be >= 1")


def orthonormal_columns(m: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``m x d`` matrix with orthonormal columns."""
    q, r = np.linalg.qr(rng.standard_normal((m, d)))
    return q * np.sign(np.diag(r))[None, :]


def _dim(spec: SynthSpec) -> int:
    if spec.intrinsic_dim is None:
        raise InvalidConfig(f"{spec.kind.value} needs intrinsic_dim")
    return spec.intrinsic_dim


def gen_hypercube_manifold(spec: SynthSpec) -> tuple[EmbeddingSet, int]:
    """Uniform samples of ``[0,1]^d`` placed in ``R^m`` by a random isometry.

    When ``d == m`` the raw cube samples are returned.
    """
    d, m = _dim(spec), spec.ambient_dim
    rng = np.random.default_rng(spec.seed)
    u = rng.random((spec.n, d))
    if d == m:
        return EmbeddingSet(u), d
    basis = orthonormal_columns(m, d, rng)
    offset = rng.standard_normal(m)
    return EmbeddingSet(u @ basis.T + offset), d


def gen_linear_subspace(spec: SynthSpec) -> tuple[EmbeddingSet, int]:
    """Standard Gaussian samples of ``R^d`` mapped into ``R^m`` by orthonormal columns."""
    d, m = _dim(spec), spec.ambient_dim
    rng = np.random.default_rng(spec.seed)
    g = rng.standard_normal((spec.n, d))
    return EmbeddingSet(g @ orthonormal_columns(m, d, rng).T), d


def gen_gaussian_blobs(spec: SynthSpec) -> tuple[EmbeddingSet, np.ndarray]:
    """Isotropic Gaussian blobs with centers ``separation`` away from the origin.

    Centers point along mutually orthogonal random directions when
    ``n_blobs <= m`` (pairwise distance ``separation * sqrt(2)``), otherwise
    along independent random unit directions. Blob sizes differ by at most one.
    """
    m = spec.ambient_dim
    rng = np.random.default_rng(spec.seed)
    if spec.n_blobs <= m:
        dirs = orthonormal_columns(m, spec.n_blobs, rng).T
    else:
        dirs = rng.standard_normal((spec.n_blobs, m))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    centers = spec.separation * dirs
    labels = rng.permutation(np.arange(spec.n) % spec.n_blobs)
    d = spec.intrinsic_dim or m
    noise = rng.standard_normal((spec.n, d)) * spec.sigma
    if d < m:
        noise = noise @ orthonormal_columns(m, d, rng).T
    return EmbeddingSet(centers[labels] + noise), labels


def generate(spec: SynthSpec):
    """Dispatch on ``spec.kind``; returns ``(embeddings, labels_or_None)``."""
    if spec.kind is SynthKind.HYPERCUBE:
        return gen_hypercube_manifold(spec)[0], None
    if spec.kind is SynthKind.SUBSPACE:
        return gen_linear_subspace(spec)[0], None
    return gen_gaussian_blobs(spec)
