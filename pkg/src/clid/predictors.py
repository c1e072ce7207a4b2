"""CLID and W-CLID predictors over a population of models."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from clid.errors import DegenerateSpreadWarning, InvalidConfig, RankDeficient, TooFewPoints


class Normalization(str, enum.Enum):
    ZSCORE = "zscore"
    RAW = "raw"


@dataclass(frozen=True)
class ModelMetrics:
    name: str
    cl: float
    id: float
    accuracy: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.cl <= 1.0:
            raise InvalidConfig(f"{self.name}: cl={self.cl} outside [0, 1]")
        if not self.id > 0:
            raise InvalidConfig(f"{self.name}: id={self.id} must be positive")
        if self.accuracy is not None and not 0.0 <= self.accuracy <= 1.0:
            raise InvalidConfig(f"{self.name}: accuracy={self.accuracy} outside [0, 1]")


@dataclass(frozen=True)
class PredictorWeights:
    """Coefficients for ``[CL, ID, 1]`` with the fit's residual sum of squares."""

    w: np.ndarray
    rss: float
    n_models: int


def _zscore(v: np.ndarray, what: str) -> np.ndarray:
    sd = v.std()
    if sd == 0.0:
        warnings.warn(f"{what} is constant across the population; its z-score is zero", DegenerateSpreadWarning, stacklevel=3)
        return np.zeros_like(v)
    return (v - v.mean()) / sd


def clid_score(population, normalization: Normalization | str = Normalization.ZSCORE) -> np.ndarray:
    """CL + ID per model; z-scored across the population unless ``"raw"``.

    Z-scores use the population standard deviation, so scores are only
    comparable within one call.
    """
    normalization = Normalization(normalization)
    cl = np.array([p.cl for p in population], dtype=np.float64)
    ids = np.array([p.id for p in population], dtype=np.float64)
    if normalization is Normalization.RAW:
        if cl.size < 1:
            raise TooFewPoints("empty population")
        return cl + ids
    if cl.size < 2:
        raise TooFewPoints("z-scored CLID needs at least 2 models")
    return _zscore(cl, "cl") + _zscore(ids, "id")


def _design(population) -> np.ndarray:
    return np.array([[p.cl, p.id, 1.0] for p in population], dtype=np.float64)


def fit_wclid(population) -> PredictorWeights:
    """Least-squares weights mapping ``[CL, ID, 1]`` to accuracy, solved by QR."""
    with_acc = [p for p in population if p.accuracy is not None]
    if len(with_acc) < 3:
        raise TooFewPoints(f"W-CLID needs 3 models with accuracy, got {len(with_acc)}")
    a = _design(with_acc)
    y = np.array([p.accuracy for p in with_acc], dtype=np.float64)
    # column scaling keeps the rank test meaningful when ID >> CL
    scale = np.linalg.norm(a, axis=0)
    q, r = np.linalg.qr(a / scale)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * diag.max():
        raise RankDeficient("CL and ID are affinely dependent across models")
    w = np.linalg.solve(r, q.T @ y) / scale
    resid = a @ w - y
    return PredictorWeights(w=w, rss=float(resid @ resid), n_models=len(with_acc))


def wclid_score(weights: PredictorWeights, m: ModelMetrics) -> float:
    w = weights.w
    return float(w[0] * m.cl + w[1] * m.id + w[2])


def wclid_loo(population) -> np.ndarray:
    """Leave-one-out W-CLID: each model scored by weights fit on the others."""
    out = np.empty(len(population))
    for i, m in enumerate(population):
        rest = population[:i] + population[i + 1 :]
        out[i] = wclid_score(fit_wclid(rest), m)
    return out
