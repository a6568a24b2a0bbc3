"""End-to-end NUCS: difficulty, budgets, windows, ridge-proxy choice of k."""

from __future__ import annotations

from dataclasses import dataclass

from .budget import BudgetPlan, allocate_nonuniform, allocate_uniform
from .data import CoresetSelection, RunReport, ScoredDataset
from .difficulty import ClassDifficultyTable, winsorized_class_difficulty
from .ridge import ProxyResult, RidgeConfig, choose_optimal_window
from .window import WindowGrid, enumerate_windows, select_window


@dataclass
class WindowRun:
    selection: CoresetSelection
    table: ClassDifficultyTable
    plan: BudgetPlan
    proxy: ProxyResult | None


def run_windowed(ds: ScoredDataset, plan: BudgetPlan, table: ClassDifficultyTable,
                 method: str, grid: WindowGrid = WindowGrid(), cfg: RidgeConfig = RidgeConfig(),
                 k_fixed: float | None = None) -> WindowRun:
    if k_fixed is not None:
        sel = select_window(ds, plan, k_fixed)
        proxy = None
        k = k_fixed
    else:
        k, sel, proxy = choose_optimal_window(enumerate_windows(ds, plan, grid), ds, cfg)
    params = {"alpha": plan.alpha, "gamma": table.gamma, "k": k, "allocation": plan.strategy}
    if k_fixed is None:
        params.update(step=grid.step, lam=cfg.lam)
    sel = CoresetSelection(sel.selected_ids, method, params, sel.per_class_counts)
    return WindowRun(sel, table, plan, proxy)


def select_nucs(ds: ScoredDataset, alpha: float, gamma: float = 0.05,
                grid: WindowGrid = WindowGrid(), cfg: RidgeConfig = RidgeConfig(),
                k_fixed: float | None = None, uniform: bool = False) -> WindowRun:
    """Run NUCS. With ``k_fixed`` the proxy search is skipped (NUCS-O mode).

    ``uniform=True`` swaps in class-proportional budgets (the ablation variant).
    """
    table = winsorized_class_difficulty(ds, gamma)
    plan = allocate_uniform(table, alpha) if uniform else allocate_nonuniform(table, alpha)
    method = "nucs" if k_fixed is None else "nucs-o"
    return run_windowed(ds, plan, table, method, grid, cfg, k_fixed)


def class_table_rows(ds: ScoredDataset, table: ClassDifficultyTable, per_class_counts) -> list[dict]:
    return [
        {
            "class": j,
            "label": ds.class_names[j],
            "N": int(table.counts[j]),
            "S": float(table.difficulty[j]),
            "b": int(per_class_counts.get(j, 0)),
        }
        for j in range(ds.n_classes)
    ]


def build_report(ds: ScoredDataset, table: ClassDifficultyTable, sel: CoresetSelection,
                 proxy: ProxyResult | None, params: dict, metrics=None,
                 chosen_k: float | None = None) -> RunReport:
    if proxy is not None:
        chosen_k = proxy.chosen_k
    return RunReport(
        class_table=class_table_rows(ds, table, sel.per_class_counts),
        chosen_k=chosen_k,
        proxy_scores={} if proxy is None else dict(proxy.scores),
        metrics=metrics,
        params=params,
    )
