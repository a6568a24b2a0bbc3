"""Dataset universe, file ingestion, and persistence of selections and reports.

File formats
------------
labels CSV     header ``id,label``; labels are arbitrary string tokens.
scores CSV     header ``id,score``; decimal literals.
features       ``NUCSFM01`` magic, little-endian u64 rows, u64 cols, then
               rows*cols little-endian float32 in row-major order. Row order
               is given by the sidecar ``<path>.ids`` (one id per line).
selection CSV  header ``id``; one selected id per row, in selection order.
report JSON    object with keys class_table, chosen_k, proxy_scores,
               metrics, params.
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ._util import atomic_write_bytes, atomic_write_text, safe_floor
from .errors import ConfigError, DataError

FEATURE_MAGIC = b"NUCSFM01"
_HEADER = struct.Struct("<8sQQ")


@dataclass(frozen=True, eq=False)
class ScoredDataset:
    """Samples with class labels, difficulty scores and optional embeddings.

    ``labels`` are dense class indices in ``[0, n_classes)``; ``class_names``
    maps each index back to the token it was read from.
    """

    ids: tuple[str, ...]
    labels: np.ndarray
    scores: np.ndarray
    features: np.ndarray | None = None
    class_names: tuple[str, ...] | None = None

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        labels = np.asarray(self.labels)
        scores = np.asarray(self.scores, dtype=np.float64)
        n = len(ids)
        if n < 1:
            raise DataError("dataset is empty")
        if len(set(ids)) != n:
            raise DataError("sample ids are not unique")
        if labels.shape != (n,) or scores.shape != (n,):
            raise DataError("ids, labels and scores must have equal length")
        if labels.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise DataError("labels must be integer class indices")
        labels = labels.astype(np.int64)
        if labels.min() < 0:
            raise DataError("class indices must be non-negative")
        n_classes = int(labels.max()) + 1
        counts = np.bincount(labels, minlength=n_classes)
        if np.any(counts == 0):
            empty = np.flatnonzero(counts == 0).tolist()
            raise DataError(f"empty class(es) {empty}; class indices must be dense")
        if not np.all(np.isfinite(scores)):
            raise DataError("scores contain non-finite values")

        features = self.features
        if features is not None:
            features = np.asarray(features, dtype=np.float64)
            if features.ndim != 2 or features.shape[0] != n or features.shape[1] < 1:
                raise DataError(
                    f"feature matrix shape {features.shape} does not match N={n} rows and d>=1"
                )
            if not np.all(np.isfinite(features)):
                raise DataError("features contain non-finite values")
            features.setflags(write=False)

        names = self.class_names
        if names is None:
            names = tuple(str(j) for j in range(n_classes))
        names = tuple(str(x) for x in names)
        if len(names) != n_classes:
            raise DataError("class_names length does not match number of classes")

        labels.setflags(write=False)
        scores.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "class_names", names)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @cached_property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    @cached_property
    def id_index(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.ids)}

    @cached_property
    def id_rank(self) -> np.ndarray:
        """Rank of each id in lexicographic order, used as a sort tie-breaker."""
        order = sorted(range(self.n), key=self.ids.__getitem__)
        rank = np.empty(self.n, dtype=np.int64)
        rank[order] = np.arange(self.n)
        return rank

    @cached_property
    def sorted_class_members(self) -> tuple[np.ndarray, ...]:
        """Per class, sample indices sorted ascending by (score, id)."""
        order = np.lexsort((self.id_rank, self.scores))
        lab = self.labels[order]
        return tuple(order[lab == j] for j in range(self.n_classes))

    def subset(self, indices: Sequence[int]) -> "ScoredDataset":
        """Dataset restricted to ``indices`` (class indices kept as-is)."""
        idx = np.asarray(indices, dtype=np.int64)
        feats = None if self.features is None else self.features[idx]
        return ScoredDataset(
            ids=tuple(self.ids[i] for i in idx),
            labels=self.labels[idx],
            scores=self.scores[idx],
            features=feats,
            class_names=self.class_names,
        )


@dataclass(frozen=True)
class CoresetSelection:
    selected_ids: tuple[str, ...]
    method: str
    params: dict[str, Any] = field(default_factory=dict)
    per_class_counts: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        ids = tuple(self.selected_ids)
        if len(set(ids)) != len(ids):
            raise DataError("selection contains duplicate ids")
        object.__setattr__(self, "selected_ids", ids)

    def __len__(self):
        return len(self.selected_ids)


def make_selection(ds: ScoredDataset, indices, method: str, params=None) -> CoresetSelection:
    idx = np.asarray(indices, dtype=np.int64)
    counts = np.bincount(ds.labels[idx], minlength=ds.n_classes)
    return CoresetSelection(
        selected_ids=tuple(ds.ids[i] for i in idx),
        method=method,
        params=dict(params or {}),
        per_class_counts={j: int(c) for j, c in enumerate(counts)},
    )


@dataclass
class RunReport:
    class_table: list[dict[str, Any]]
    chosen_k: float | None = None
    proxy_scores: dict[float, float] = field(default_factory=dict)
    metrics: dict[str, float] | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for row in self.class_table:
            if row["b"] > row["N"]:
                raise DataError(f"class {row['class']}: budget exceeds class size")

    def to_dict(self) -> dict[str, Any]:
        return {
            "class_table": self.class_table,
            "chosen_k": self.chosen_k,
            "proxy_scores": {_k_key(k): v for k, v in sorted(self.proxy_scores.items())},
            "metrics": self.metrics,
            "params": self.params,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _k_key(k: float) -> str:
    return f"{k:.6g}"


# ---------------------------------------------------------------------------
# reading


def _read_two_column_csv(path, value_col: str) -> list[tuple[str, str]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header != ["id", value_col]:
            raise DataError(f"{path}: expected header 'id,{value_col}', got {','.join(header)!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            rows.append((row[0], row[1].strip()))
    ids = [r[0] for r in rows]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate ids")
    return rows


def read_features(path) -> tuple[list[str], np.ndarray]:
    """Read a binary feature matrix and its sidecar id list."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise DataError(f"{path}: truncated header")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != FEATURE_MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 4 * rows * cols
    if len(raw) != expected:
        raise DataError(f"{path}: expected {expected} bytes for {rows}x{cols}, got {len(raw)}")
    mat = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(rows, cols)

    sidecar = Path(str(path) + ".ids")
    if not sidecar.exists():
        raise DataError(f"{sidecar}: id sidecar not found")
    ids = sidecar.read_text(encoding="utf-8").splitlines()
    if len(ids) != rows:
        raise DataError(f"{sidecar}: {len(ids)} ids for {rows} matrix rows")
    if len(set(ids)) != len(ids):
        raise DataError(f"{sidecar}: duplicate ids")
    return ids, mat.astype(np.float32)


def write_features(path, ids: Sequence[str], features) -> None:
    mat = np.ascontiguousarray(np.asarray(features, dtype="<f4"))
    if mat.ndim != 2 or mat.shape[0] != len(ids):
        raise DataError("feature matrix rows must match id count")
    rows, cols = mat.shape
    atomic_write_bytes(path, _HEADER.pack(FEATURE_MAGIC, rows, cols) + mat.tobytes())
    atomic_write_text(str(path) + ".ids", "".join(f"{i}\n" for i in ids))


def _check_same_ids(reference: Sequence[str], other: Sequence[str], what: str) -> None:
    ref, oth = set(reference), set(other)
    if ref != oth:
        missing = sorted(ref - oth)[:5]
        extra = sorted(oth - ref)[:5]
        raise DataError(f"id set mismatch in {what}: missing {missing}, extra {extra}")


def load_dataset(labels_path, scores_path, features_path=None) -> ScoredDataset:
    """Join labels, scores and optional features by sample id.

    Sample order follows the labels file; class indices are assigned in order
    of first appearance of each label token.
    """
    label_rows = _read_two_column_csv(labels_path, "label")
    score_rows = _read_two_column_csv(scores_path, "score")
    ids = [r[0] for r in label_rows]
    if not ids:
        raise DataError(f"{labels_path}: no samples")
    _check_same_ids(ids, [r[0] for r in score_rows], "scores file")

    class_index: dict[str, int] = {}
    labels = np.empty(len(ids), dtype=np.int64)
    for i, (_, token) in enumerate(label_rows):
        labels[i] = class_index.setdefault(token, len(class_index))

    score_map = {}
    for sid, text in score_rows:
        try:
            score_map[sid] = float(text)
        except ValueError:
            raise DataError(f"{scores_path}: score for {sid!r} is not a number: {text!r}") from None
    scores = np.array([score_map[i] for i in ids], dtype=np.float64)

    features = None
    if features_path is not None:
        feat_ids, mat = read_features(features_path)
        _check_same_ids(ids, feat_ids, "features file")
        row_of = {sid: r for r, sid in enumerate(feat_ids)}
        features = mat[[row_of[i] for i in ids]]

    return ScoredDataset(
        ids=tuple(ids),
        labels=labels,
        scores=scores,
        features=features,
        class_names=tuple(class_index),
    )


def save_dataset(ds: ScoredDataset, labels_path, scores_path, features_path=None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "label"])
    for sid, lab in zip(ds.ids, ds.labels):
        w.writerow([sid, ds.class_names[lab]])
    atomic_write_text(labels_path, buf.getvalue())

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "score"])
    for sid, s in zip(ds.ids, ds.scores):
        w.writerow([sid, repr(float(s))])
    atomic_write_text(scores_path, buf.getvalue())

    if features_path is not None:
        if ds.features is None:
            raise DataError("dataset has no features to write")
        write_features(features_path, ds.ids, ds.features)


def save_selection(sel: CoresetSelection, out_path) -> None:
    if len(sel.selected_ids) == 0:
        raise DataError("refusing to write an empty selection")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id"])
    for sid in sel.selected_ids:
        w.writerow([sid])
    atomic_write_text(out_path, buf.getvalue())


def load_selection(path) -> list[str]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id"]:
            raise DataError(f"{path}: expected header 'id'")
        ids = [row[0] for row in reader if row]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate ids")
    return ids


def read_label_map(path, value_col: str = "label") -> dict[str, str]:
    return dict(_read_two_column_csv(path, value_col))


def write_report(report: RunReport, path) -> None:
    atomic_write_text(path, report.to_json())


def make_long_tailed(ds: ScoredDataset, imbalance_factor: float, seed: int) -> ScoredDataset:
    """Subsample classes geometrically so class j keeps floor(N_j * mu**j).

    ``mu = I ** (1 / (1 - Y))``, so the first/last class size ratio is about
    ``I`` for a balanced input. Retained samples keep their original order.
    """
    n_classes = ds.n_classes
    if n_classes < 2:
        raise ConfigError("long-tailed subsampling needs at least 2 classes")
    if not (imbalance_factor >= 1.0 and math.isfinite(imbalance_factor)):
        raise ConfigError(f"imbalance factor must be >= 1, got {imbalance_factor}")
    mu = imbalance_factor ** (1.0 / (1 - n_classes))
    rng = np.random.default_rng(seed)
    keep = []
    for j in range(n_classes):
        members = np.flatnonzero(ds.labels == j)
        n_keep = safe_floor(len(members) * mu**j)
        if n_keep < 1:
            raise DataError(f"class {ds.class_names[j]!r} would keep 0 samples")
        keep.append(rng.choice(members, size=n_keep, replace=False))
    return ds.subset(np.sort(np.concatenate(keep)))
