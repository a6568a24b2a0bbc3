"""Non-uniform class-wise coreset selection."""

from .baselines import (
    select_bws,
    select_ccs,
    select_ccs_cp,
    select_hard,
    select_moderate,
    select_random,
)
from .budget import BudgetPlan, allocate_nonuniform, allocate_uniform
from .data import (
    CoresetSelection,
    RunReport,
    ScoredDataset,
    load_dataset,
    load_selection,
    make_long_tailed,
    save_dataset,
    save_selection,
)
from .difficulty import (
    ClassDifficultyTable,
    coefficient_of_variation,
    combine_epoch_errors,
    normalize_aum_scores,
    winsorized_class_difficulty,
)
from .errors import ConfigError, DataError, NucsError, NumericError
from .gaussian import (
    GaussianTwoClassModel,
    error_rate,
    monte_carlo_error,
    optimal_constrained,
    optimal_interior,
)
from .pipeline import select_nucs
from .ridge import RidgeConfig, bias_metrics, choose_optimal_window, fit_ridge, proxy_accuracy
from .window import WindowGrid, enumerate_windows, select_window

__version__ = "0.1.0"
