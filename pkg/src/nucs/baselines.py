"""Reference selectors: random, hardest-first, CCS, Moderate, BWS and CCS-CP.

CCS strata are equal-width over the score range of the post-cutoff pool and
the budget is water-filled from the smallest stratum up. Moderate keeps, per
class, the samples whose distance to the class centroid is closest to the
median distance.
"""

from __future__ import annotations

import numpy as np

from ._util import coreset_size, safe_floor
from .budget import allocate_uniform
from .data import CoresetSelection, ScoredDataset, make_selection
from .errors import ConfigError, DataError
from .pipeline import WindowRun, run_windowed
from .difficulty import winsorized_class_difficulty
from .ridge import RidgeConfig
from .window import WindowGrid

DEFAULT_BINS = 50


def select_random(ds: ScoredDataset, alpha: float, seed: int) -> CoresetSelection:
    size = coreset_size(ds.n, alpha)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.permutation(ds.n)[:size])
    return make_selection(ds, idx, "random", {"alpha": alpha, "seed": seed})


def select_hard(ds: ScoredDataset, alpha: float) -> CoresetSelection:
    """The globally highest-scored samples, hardest first (ties by id)."""
    size = coreset_size(ds.n, alpha)
    order = np.lexsort((ds.id_rank, -ds.scores))
    return make_selection(ds, order[:size], "el2n-hard", {"alpha": alpha})


def _stratum_quotas(sizes: np.ndarray, budget: int) -> np.ndarray:
    """Spread ``budget`` over strata as evenly as their sizes allow."""
    quotas = np.zeros(sizes.size, dtype=np.int64)
    remaining = budget
    order = np.argsort(sizes, kind="stable")
    for i, s in enumerate(order):
        take = min(int(sizes[s]), remaining // (sizes.size - i))
        quotas[s] = take
        remaining -= take
    return quotas


def _ccs_indices(ds: ScoredDataset, members: np.ndarray, budget: int, beta: float,
                 bins: int, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 <= beta < 1.0:
        raise ConfigError(f"hard cutoff rate must lie in [0, 1), got {beta}")
    if bins < 1:
        raise ConfigError(f"number of strata must be >= 1, got {bins}")
    n_cut = safe_floor(beta * members.size)
    hardest_first = members[np.lexsort((ds.id_rank[members], -ds.scores[members]))]
    pool = np.sort(hardest_first[n_cut:])
    if budget > pool.size:
        raise ConfigError(f"budget {budget} exceeds the {pool.size} samples left after the cutoff")

    s = ds.scores[pool]
    lo, hi = s.min(), s.max()
    width = (hi - lo) / bins
    if width > 0:
        stratum = np.minimum(((s - lo) / width).astype(np.int64), bins - 1)
    else:
        stratum = np.zeros(pool.size, dtype=np.int64)
    present = np.unique(stratum)
    sizes = np.array([np.count_nonzero(stratum == b) for b in present])
    quotas = _stratum_quotas(sizes, budget)

    chosen = []
    for b, q in zip(present, quotas):
        members_b = pool[stratum == b]
        chosen.append(rng.permutation(members_b)[:q])
    return np.sort(np.concatenate(chosen))


def select_ccs(ds: ScoredDataset, alpha: float, beta: float = 0.0, bins: int = DEFAULT_BINS,
               seed: int = 0) -> CoresetSelection:
    size = coreset_size(ds.n, alpha)
    rng = np.random.default_rng(seed)
    idx = _ccs_indices(ds, np.arange(ds.n), size, beta, bins, rng)
    return make_selection(ds, idx, "ccs", {"alpha": alpha, "beta": beta, "bins": bins, "seed": seed})


def select_ccs_cp(ds: ScoredDataset, alpha: float, beta: float = 0.0, bins: int = DEFAULT_BINS,
                  seed: int = 0) -> CoresetSelection:
    """CCS run independently inside each class on class-proportional budgets."""
    plan = allocate_uniform(ds.class_counts, alpha)
    rng = np.random.default_rng(seed)
    parts = [
        _ccs_indices(ds, np.sort(members), int(b), beta, bins, rng)
        for members, b in zip(ds.sorted_class_members, plan.budgets)
    ]
    idx = np.concatenate(parts)
    return make_selection(ds, idx, "ccs-cp", {"alpha": alpha, "beta": beta, "bins": bins, "seed": seed})


def select_moderate(ds: ScoredDataset, alpha: float) -> CoresetSelection:
    if ds.features is None:
        raise DataError("moderate selection needs a feature matrix")
    plan = allocate_uniform(ds.class_counts, alpha)
    parts = []
    for j, b in enumerate(plan.budgets):
        members = np.flatnonzero(ds.labels == j)
        x = ds.features[members]
        dist = np.linalg.norm(x - x.mean(axis=0), axis=1)
        gap = np.abs(dist - np.median(dist))
        order = np.lexsort((ds.id_rank[members], gap))
        parts.append(members[order[: int(b)]])
    return make_selection(ds, np.concatenate(parts), "moderate", {"alpha": alpha})


def run_bws(ds: ScoredDataset, alpha: float, grid: WindowGrid = WindowGrid(),
            cfg: RidgeConfig = RidgeConfig(), gamma: float = 0.05) -> WindowRun:
    if ds.features is None:
        raise DataError("BWS needs a feature matrix")
    table = winsorized_class_difficulty(ds, gamma)
    plan = allocate_uniform(table, alpha)
    return run_windowed(ds, plan, table, "bws", grid, cfg)


def select_bws(ds: ScoredDataset, alpha: float, grid: WindowGrid = WindowGrid(),
               cfg: RidgeConfig = RidgeConfig()) -> CoresetSelection:
    """Window selection on class-proportional budgets with ridge-proxy choice of k."""
    return run_bws(ds, alpha, grid, cfg).selection
