"""Correlation coefficients, tie-aware ranking and the joint rank product."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from clid.errors import AllTied, LengthMismatch, ZeroVariance


class Direction(str, enum.Enum):
    HIGHER_IS_BETTER = "higher"
    LOWER_IS_BETTER = "lower"


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths {x.size} and {y.size} differ")
    if x.size < 2:
        raise LengthMismatch("need at least 2 observations")
    return x, y


def pearson(x, y) -> float:
    x, y = _pair(x, y)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("pearson is undefined for a constant input")
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def kendall_tau(x, y, variant: str = "b") -> float:
    """Kendall rank correlation by full pair enumeration.

    ``variant="b"`` (default) divides ``C - D`` by
    ``sqrt((C + D + T_x)(C + D + T_y))`` where ``T_x`` counts pairs tied in
    ``x`` only; ``"a"`` divides by the number of pairs.
    """
    x, y = _pair(x, y)
    iu = np.triu_indices(x.size, k=1)
    sx = np.sign(x[:, None] - x[None, :])[iu]
    sy = np.sign(y[:, None] - y[None, :])[iu]
    s = int(np.sum(sx * sy))
    if variant == "a":
        return s / sx.size
    if variant != "b":
        raise ValueError(f"unknown variant {variant!r}")
    untied_x = int(np.count_nonzero(sx))
    untied_y = int(np.count_nonzero(sy))
    if untied_x == 0 or untied_y == 0:
        raise AllTied("every pair is tied in x or in y")
    return s / np.sqrt(float(untied_x) * float(untied_y))


def rank_with_ties(x, direction: Direction | str = Direction.HIGHER_IS_BETTER) -> np.ndarray:
    """Ranks with 1 for the best value; ties share their average rank."""
    x = np.asarray(x, dtype=np.float64).ravel()
    direction = Direction(direction)
    return rankdata(-x if direction is Direction.HIGHER_IS_BETTER else x, method="average")


def rank_product_joint(r_pred, r_ref) -> np.ndarray:
    """Re-ranked geometric mean ``sqrt(r_pred * r_ref)`` (1 = best)."""
    a = np.asarray(r_pred, dtype=np.float64).ravel()
    b = np.asarray(r_ref, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {a.size} and {b.size} differ")
    if np.any(a < 1) or np.any(b < 1):
        raise ValueError("ranks must be >= 1")
    return rank_with_ties(np.sqrt(a * b), Direction.LOWER_IS_BETTER)


@dataclass(frozen=True)
class RankingReport:
    pearson: float | None
    kendall: float | None
    ranks_pred: np.ndarray
    ranks_ref: np.ndarray
    joint_ranks: np.ndarray | None = None


def compare(pred, ref, ref_for_joint=None) -> RankingReport:
    """Correlate predictor scores with reference accuracies (both higher-is-better).

    When ``ref_for_joint`` is given, the predictor ranks are fused with the
    ranks of those (source) accuracies and Kendall tau is computed for the
    joint ranking instead of the raw scores.
    """
    pred, ref = _pair(pred, ref)
    rp, rr = rank_with_ties(pred), rank_with_ties(ref)
    if ref_for_joint is None:
        return RankingReport(pearson(pred, ref), kendall_tau(pred, ref), rp, rr)
    joint = rank_product_joint(rp, rank_with_ties(ref_for_joint))
    # ranks are lower-is-better, so negate to correlate with accuracies
    return RankingReport(None, kendall_tau(-joint, ref), rp, rr, joint)
