"""Embedding files (EMB1 binary, CSV), label files and model manifests.

EMB1 layout, little-endian::

    offset  size  field
    0       4     magic b"EMB1"
    4       4     u32 version (1)
    8       8     u64 n_rows
    16      4     u32 n_cols
    20      1     u8 dtype (0 = float32, 1 = float64)
    21      3     reserved, zero
    24      ...   n_rows * n_cols values, row-major
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from clid.embeddings import EmbeddingSet
from clid.errors import BadMagic, BadManifest, NonFiniteValue, RaggedCsv, TruncatedFile

MAGIC = b"EMB1"
VERSION = 1
HEADER = struct.Struct("<4sIQIB3x")
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODES = {np.dtype("float32"): 0, np.dtype("float64"): 1}


def write_emb1(path, e, dtype=None) -> None:
    """Write an EMB1 file; ``dtype`` defaults to the stored precision (float32 or float64)."""
    x = e.data if isinstance(e, EmbeddingSet) else np.asarray(e)
    dt = np.dtype(dtype) if dtype is not None else (x.dtype if x.dtype in _CODES else np.dtype("float64"))
    if dt not in _CODES:
        raise ValueError(f"unsupported dtype {dt}")
    code = _CODES[dt]
    n, m = x.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, n, m, code))
        fh.write(np.ascontiguousarray(x, dtype=_DTYPES[code]).tobytes())


def _check_finite(values: np.ndarray, offset: int, itemsize: int, where: str) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        flat = row * values.shape[1] + col
        raise NonFiniteValue(
            f"{where}: non-finite value at row {row}, col {col}",
            row=row,
            col=col,
            byte_offset=offset + flat * itemsize if itemsize else None,
        )


def read_emb1(path) -> EmbeddingSet:
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagic(f"{path}: expected magic {MAGIC!r} at byte 0, found {raw[:4]!r}", byte_offset=0)
    if len(raw) < HEADER.size:
        raise TruncatedFile(f"{path}: header needs {HEADER.size} bytes, file has {len(raw)}", byte_offset=len(raw))
    _, version, n, m, code = HEADER.unpack_from(raw)
    if version != VERSION:
        raise BadMagic(f"{path}: unsupported EMB1 version {version} at byte 4", byte_offset=4)
    if code not in _DTYPES:
        raise BadMagic(f"{path}: unknown dtype code {code} at byte 20", byte_offset=20)
    dt = _DTYPES[code]
    expected = HEADER.size + n * m * dt.itemsize
    if len(raw) != expected:
        raise TruncatedFile(
            f"{path}: header declares {expected} bytes, file has {len(raw)}",
            byte_offset=min(len(raw), expected),
            expected=expected,
            actual=len(raw),
        )
    values = np.frombuffer(raw, dtype=dt, offset=HEADER.size).reshape(n, m)
    _check_finite(values, HEADER.size, dt.itemsize, str(path))
    return EmbeddingSet(values.astype(dt.newbyteorder("="), copy=True))


def read_csv(path, has_header: bool = False) -> EmbeddingSet:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for lineno, row in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise RaggedCsv(f"{path}: row {lineno} has {len(row)} fields, expected {width}", row=lineno)
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise NonFiniteValue(f"{path}: row {lineno}: {exc}", row=lineno) from None
    values = np.array(rows, dtype=np.float64)
    if values.ndim == 2 and values.size:
        _check_finite(values, 0, 0, str(path))
    return EmbeddingSet(values)


def write_csv(path, e) -> None:
    x = e.data if isinstance(e, EmbeddingSet) else np.asarray(e)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(x, dtype=np.float64):
            w.writerow([repr(float(v)) for v in row])


def read_embeddings(path, csv_has_header: bool = False) -> EmbeddingSet:
    """Read by extension: ``.csv`` as CSV, anything else as EMB1."""
    if str(path).lower().endswith(".csv"):
        return read_csv(path, csv_has_header)
    return read_emb1(path)


def write_embeddings(path, e, dtype=None) -> None:
    if str(path).lower().endswith(".csv"):
        write_csv(path, e)
    else:
        write_emb1(path, e, dtype)


def read_labels(path) -> np.ndarray:
    """One integer per non-empty line."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            try:
                out.append(int(s))
            except ValueError:
                raise BadManifest(f"{path}: line {lineno} is not an integer label: {s!r}", row=lineno) from None
    return np.asarray(out, dtype=np.int64)


def write_labels(path, labels) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{int(v)}\n" for v in labels)


@dataclass(frozen=True)
class ModelEntry:
    name: str
    embeddings_path: Path | None = None
    paired_path: Path | None = None
    labels_path: Path | None = None
    accuracy: float | None = None


@dataclass(frozen=True)
class Manifest:
    models: tuple
    task: str | None = None
    path: Path | None = None

    @property
    def names(self) -> list[str]:
        return [m.name for m in self.models]


_KEYS = {"name", "embeddings_path", "paired_path", "labels_path", "accuracy"}


def load_manifest(path, require_embeddings: bool = True) -> Manifest:
    """Load a JSON manifest; relative paths resolve against its directory.

    Shape: ``{"task": str?, "models": [{"name", "embeddings_path",
    "paired_path"?, "labels_path"?, "accuracy"?}, ...]}``.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise BadManifest(f"{path}: invalid JSON at byte {exc.pos}: {exc.msg}", byte_offset=exc.pos) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("models"), list):
        raise BadManifest(f"{path}: expected an object with a 'models' list")
    base = path.parent
    models, seen = [], set()
    for i, item in enumerate(doc["models"]):
        if not isinstance(item, dict) or "name" not in item:
            raise BadManifest(f"{path}: models[{i}] needs a 'name'")
        unknown = set(item) - _KEYS
        if unknown:
            raise BadManifest(f"{path}: models[{i}] has unknown keys {sorted(unknown)}")
        name = str(item["name"])
        if name in seen:
            raise BadManifest(f"{path}: duplicate model name {name!r}")
        seen.add(name)
        paths = {}
        for key in ("embeddings_path", "paired_path", "labels_path"):
            if item.get(key) is None:
                paths[key] = None
                continue
            p = Path(item[key])
            p = p if p.is_absolute() else base / p
            if not p.exists():
                raise BadManifest(f"{path}: {name}: {key} {p} does not exist")
            paths[key] = p
        if require_embeddings and paths["embeddings_path"] is None:
            raise BadManifest(f"{path}: {name}: embeddings_path is required")
        acc = item.get("accuracy")
        models.append(ModelEntry(name=name, accuracy=None if acc is None else float(acc), **paths))
    return Manifest(tuple(models), doc.get("task"), path)
