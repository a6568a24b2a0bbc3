"""Per-class winsorized difficulty and score transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import safe_floor
from .data import ScoredDataset
from .errors import ConfigError, DataError, NumericError

AUM_EPS = 1e-9


@dataclass(frozen=True)
class ClassDifficultyTable:
    counts: np.ndarray
    difficulty: np.ndarray
    gamma: float

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        difficulty = np.asarray(self.difficulty, dtype=np.float64)
        if counts.ndim != 1 or counts.shape != difficulty.shape or counts.size == 0:
            raise DataError("counts and difficulty must be equal-length 1-D arrays")
        if np.any(counts < 1):
            raise DataError("every class needs at least one sample")
        if not np.all(np.isfinite(difficulty)):
            raise DataError("class difficulties must be finite")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "difficulty", difficulty)

    @property
    def n_classes(self) -> int:
        return int(self.counts.size)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def winsorized_mean_sorted(s: np.ndarray, gamma: float) -> float:
    """Winsorized mean of an ascending-sorted vector.

    With ``k = floor(gamma * n)`` the k smallest values count as ``s[k]`` and
    the k largest as ``s[n-k-1]``; the interior is summed as-is.
    """
    n = s.size
    k = safe_floor(gamma * n)
    return float((s[k : n - k].sum() + k * s[k] + k * s[n - k - 1]) / n)


def winsorized_class_difficulty(ds: ScoredDataset, gamma: float = 0.05) -> ClassDifficultyTable:
    if not 0.0 <= gamma < 0.5:
        raise ConfigError(f"winsorization fraction must lie in [0, 0.5), got {gamma}")
    diff = np.array(
        [winsorized_mean_sorted(ds.scores[m], gamma) for m in ds.sorted_class_members]
    )
    return ClassDifficultyTable(counts=ds.class_counts.copy(), difficulty=diff, gamma=gamma)


def coefficient_of_variation(table: ClassDifficultyTable) -> float:
    """Sample standard deviation of class difficulties over their mean."""
    s = table.difficulty
    if s.size < 2:
        raise DataError("coefficient of variation needs at least 2 classes")
    mean = s.mean()
    if mean == 0.0:
        raise NumericError("degenerate difficulty table: mean class difficulty is zero")
    return float(s.std(ddof=1) / mean)


def normalize_aum_scores(raw) -> np.ndarray:
    """Flip polarity so higher means harder, and shift to strictly positive."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        return raw.copy()
    if not np.all(np.isfinite(raw)):
        raise DataError("AUM scores contain non-finite values")
    return raw.max() - raw + AUM_EPS


def combine_epoch_errors(per_epoch_l2_errors) -> np.ndarray:
    """Average per-epoch prediction-error norms into one score per sample."""
    m = np.asarray(per_epoch_l2_errors, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise DataError("per-epoch error matrix is empty")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise DataError("per-epoch errors must be finite and non-negative")
    return m.mean(axis=1)
