"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` so the CLI can emit a
structured error object without string matching.
"""

from __future__ import annotations


class ClidError(ValueError):
    """Base class for all precondition and format errors."""

    code = "ClidError"

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.code)
        self.context = context

    def to_dict(self) -> dict:
        return {"type": self.code, "message": str(self), **self.context}


def _make(name: str, doc: str) -> type:
    return type(name, (ClidError,), {"code": name, "__doc__": doc})


# core data
ZeroNormRow = _make("ZeroNormRow", "A row has (numerically) zero Euclidean norm.")
KTooLarge = _make("KTooLarge", "Requested more neighbors than available points.")
ShapeMismatch = _make("ShapeMismatch", "Arrays have incompatible shapes.")
InvalidEmbedding = _make("InvalidEmbedding", "Embedding matrix is empty, not 2-D, or non-finite.")

# id estimation
TooFewPoints = _make("TooFewPoints", "Not enough usable points for the estimator.")
DegenerateRatios = _make("DegenerateRatios", "All retained neighbor ratios equal one.")
ZeroDistance = _make("ZeroDistance", "Neighbor distances are zero for every point.")
NumericOverflow = _make("NumericOverflow", "A log-volume or density term is non-finite.")

# clustering / learnability
KOutOfRange = _make("KOutOfRange", "Cluster count outside [1, N].")
LabelLengthMismatch = _make("LabelLengthMismatch", "Label vector length differs from row count.")
EmptyAfterChunking = _make("EmptyAfterChunking", "No chunk has at least two points.")
InvalidConfig = _make("InvalidConfig", "Configuration value out of range.")

# predictors / rank statistics
RankDeficient = _make("RankDeficient", "Design matrix does not have full column rank.")
ZeroVariance = _make("ZeroVariance", "Input has zero variance.")
LengthMismatch = _make("LengthMismatch", "Input vectors differ in length.")
AllTied = _make("AllTied", "Every pair is tied; Kendall tau is undefined.")

# baselines
NonFiniteLogDet = _make("NonFiniteLogDet", "Log-determinant is not finite.")

# synth
DimMismatch = _make("DimMismatch", "Intrinsic dimension exceeds ambient dimension.")

# io / cli
BadMagic = _make("BadMagic", "File does not start with the EMB1 magic bytes.")
TruncatedFile = _make("TruncatedFile", "File length does not match its header.")
NonFiniteValue = _make("NonFiniteValue", "A stored value is NaN or infinite.")
RaggedCsv = _make("RaggedCsv", "CSV rows have differing column counts.")
BadManifest = _make("BadManifest", "Manifest document is malformed.")
NameMismatch = _make("NameMismatch", "Model names differ between manifests.")


class DegenerateSpreadWarning(UserWarning):
    """A metric is constant across the population; its z-score is set to zero."""


class DuplicatePointsWarning(UserWarning):
    """Points at zero distance from their nearest neighbor were dropped."""
