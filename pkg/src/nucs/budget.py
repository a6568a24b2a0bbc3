"""Integer per-class selection budgets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import coreset_size, safe_floor
from .difficulty import ClassDifficultyTable
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class BudgetPlan:
    budgets: np.ndarray
    alpha: float
    strategy: str
    capped: np.ndarray

    @property
    def total(self) -> int:
        return int(self.budgets.sum())


def _capped_targets(total: int, weights: np.ndarray, counts: np.ndarray):
    """Proportional targets with per-class caps, iterated to a fixpoint.

    Capped classes are pinned at their size and the leftover budget is shared
    among the rest in proportion to their weights; this repeats until nothing
    exceeds its cap (at most one round per class).
    """
    capped = np.zeros(counts.size, dtype=bool)
    targets = np.zeros(counts.size, dtype=np.float64)
    for _ in range(counts.size + 1):
        free = ~capped
        remaining = total - counts[capped].sum()
        targets[capped] = counts[capped]
        targets[free] = remaining * weights[free] / weights[free].sum()
        over = free & (targets > counts)
        if not over.any():
            return targets, capped
        capped |= over
    raise AssertionError("capping did not reach a fixpoint")


def _integerize(total: int, targets: np.ndarray, counts: np.ndarray, capped: np.ndarray,
                weights: np.ndarray) -> np.ndarray:
    budgets = np.array([safe_floor(r) for r in targets], dtype=np.int64)
    budgets = np.minimum(budgets, counts)
    budgets[capped] = counts[capped]
    frac = targets - budgets
    # largest fractional remainder first, ties to the lower class index
    order = sorted(np.flatnonzero(~capped), key=lambda j: (-frac[j], j))
    short = total - int(budgets.sum())
    while short > 0:
        progressed = False
        for j in order:
            if short == 0:
                break
            if budgets[j] < counts[j]:
                budgets[j] += 1
                short -= 1
                progressed = True
        if not progressed:
            raise AssertionError("budget cannot be placed")

    # every class keeps at least one sample; take units from the largest budgets
    for j in np.flatnonzero(budgets == 0):
        donors = np.flatnonzero(budgets > 1)
        donor = min(donors, key=lambda i: (-budgets[i], weights[i], -i))
        budgets[donor] -= 1
        budgets[j] = 1
    return budgets


def _counts_of(table) -> np.ndarray:
    if isinstance(table, ClassDifficultyTable):
        return table.counts
    counts = np.asarray(table, dtype=np.int64)
    if counts.ndim != 1 or counts.size == 0 or np.any(counts < 1):
        raise DataError("class counts must be a non-empty vector of positive integers")
    return counts


def _check_total(total: int, n_classes: int) -> None:
    if total < n_classes:
        raise ConfigError(
            f"coreset size {total} is smaller than the number of classes {n_classes}"
        )


def allocate_nonuniform(table: ClassDifficultyTable, alpha: float) -> BudgetPlan:
    """Budgets proportional to difficulty times class size, capped at class size."""
    counts = table.counts
    difficulty = table.difficulty
    if np.any(difficulty <= 0):
        raise DataError(
            "class difficulties must be positive for non-uniform allocation; "
            "normalize scores first (e.g. normalize_aum_scores)"
        )
    total = coreset_size(int(counts.sum()), alpha)
    _check_total(total, counts.size)
    weights = difficulty * counts
    targets, capped = _capped_targets(total, weights, counts)
    budgets = _integerize(total, targets, counts, capped, weights)
    return BudgetPlan(budgets=budgets, alpha=alpha, strategy="nonuniform", capped=capped)


def allocate_uniform(table, alpha: float) -> BudgetPlan:
    """Class-proportional budgets (the same selection rate in every class).

    Accepts a ClassDifficultyTable or a plain vector of class counts.
    """
    counts = _counts_of(table)
    total = coreset_size(int(counts.sum()), alpha)
    _check_total(total, counts.size)
    weights = counts.astype(np.float64)
    targets = total * weights / weights.sum()
    capped = np.zeros(counts.size, dtype=bool)
    budgets = _integerize(total, targets, counts, capped, weights)
    return BudgetPlan(budgets=budgets, alpha=alpha, strategy="uniform", capped=capped)
