"""Label-free evaluation of learned representations.

Expressiveness is measured by intrinsic dimension, learnability by the
online KNN accuracy on K-means pseudo-labels (cluster learnability); the two
combine into the CLID and W-CLID predictors of downstream accuracy.
"""

__version__ = "0.1.0"

from clid.embeddings import EmbeddingSet, Metric, NeighborTable, knn_query, normalize_rows  # noqa: E402
from clid.intrinsic_dim import knn_entropy, mle_local_id, twonn_fit_from_ratios, twonn_id  # noqa: E402
from clid.kmeans import Partition, kmeans  # noqa: E402
from clid.learnability import PrequentialConfig, cluster_learnability, prequential_knn  # noqa: E402
from clid.predictors import ModelMetrics, clid_score, fit_wclid, wclid_score  # noqa: E402
from clid.rank_stats import kendall_tau, pearson, rank_product_joint, rank_with_ties  # noqa: E402

__all__ = [
    "EmbeddingSet",
    "Metric",
    "ModelMetrics",
    "NeighborTable",
    "Partition",
    "PrequentialConfig",
    "clid_score",
    "cluster_learnability",
    "fit_wclid",
    "kendall_tau",
    "kmeans",
    "knn_entropy",
    "knn_query",
    "mle_local_id",
    "normalize_rows",
    "pearson",
    "prequential_knn",
    "rank_product_joint",
    "rank_with_ties",
    "twonn_fit_from_ratios",
    "twonn_id",
    "wclid_score",
]
