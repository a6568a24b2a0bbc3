"""Contiguous intra-class windows over difficulty-sorted samples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._util import safe_floor
from .budget import BudgetPlan
from .data import CoresetSelection, ScoredDataset, make_selection
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class WindowGrid:
    """Window endpoints 0, t, 2t, ... and always 1.0."""

    step: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.step <= 1.0:
            raise ConfigError(f"window step must lie in (0, 1], got {self.step}")

    @property
    def endpoints(self) -> tuple[float, ...]:
        n = safe_floor(1.0 / self.step)
        ks = [round(i * self.step, 12) for i in range(n + 1)]
        if ks[-1] < 1.0:
            ks.append(1.0)
        return tuple(sorted(set(min(k, 1.0) for k in ks)))


class Candidate(NamedTuple):
    k: float
    selection: CoresetSelection
    duplicate: bool


def window_bounds(n_j: int, b_j: int, k: float) -> tuple[int, int]:
    """Half-open [start, end) of the window in a class of size ``n_j``."""
    end = safe_floor(k * n_j)
    start = end - b_j
    if start < 0:
        return 0, b_j
    return start, end


def window_indices(ds: ScoredDataset, plan: BudgetPlan, k: float) -> np.ndarray:
    if not 0.0 <= k <= 1.0:
        raise ConfigError(f"window endpoint must lie in [0, 1], got {k}")
    budgets = plan.budgets
    if budgets.size != ds.n_classes or np.any(budgets > ds.class_counts) or np.any(budgets < 0):
        raise DataError("budget plan is inconsistent with the dataset")
    parts = []
    for members, b in zip(ds.sorted_class_members, budgets):
        start, end = window_bounds(members.size, int(b), k)
        parts.append(members[start:end])
    return np.concatenate(parts)


def select_window(ds: ScoredDataset, plan: BudgetPlan, k: float) -> CoresetSelection:
    """Take, in every class, the b_j consecutive (score, id)-ranked samples ending at floor(k*N_j)."""
    idx = window_indices(ds, plan, k)
    return make_selection(ds, idx, "window", {"k": k, "alpha": plan.alpha, "allocation": plan.strategy})


def enumerate_windows(ds: ScoredDataset, plan: BudgetPlan, grid: WindowGrid) -> list[Candidate]:
    out: list[Candidate] = []
    prev = None
    for k in grid.endpoints:
        sel = select_window(ds, plan, k)
        out.append(Candidate(k, sel, prev is not None and sel.selected_ids == prev))
        prev = sel.selected_ids
    return out
