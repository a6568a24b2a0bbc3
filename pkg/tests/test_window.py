import numpy as np
import pytest

from nucs.budget import BudgetPlan, allocate_nonuniform
from nucs.data import ScoredDataset
from nucs.difficulty import winsorized_class_difficulty
from nucs.errors import ConfigError
from nucs.window import WindowGrid, enumerate_windows, select_window, window_bounds

from conftest import synthetic_dataset


def plan_of(budgets, alpha=0.5):
    b = np.asarray(budgets)
    return BudgetPlan(budgets=b, alpha=alpha, strategy="manual", capped=np.zeros(b.size, bool))


def ranked_class(n=10):
    # ids sort in score order, so rank r is sample f"r{r:02d}"
    ids = tuple(f"r{i:02d}" for i in range(n))
    return ScoredDataset(ids=ids, labels=np.zeros(n, int), scores=np.arange(n, dtype=float))


def picked_ranks(sel):
    return sorted(int(i[1:]) for i in sel.selected_ids)


def test_bounds_examples():
    assert window_bounds(10, 4, 0.5) == (1, 5)
    assert window_bounds(10, 4, 0.2) == (0, 4)
    assert window_bounds(10, 4, 1.0) == (6, 10)


def test_mid_window():
    assert picked_ranks(select_window(ranked_class(), plan_of([4]), 0.5)) == [1, 2, 3, 4]


def test_clamped_window():
    assert picked_ranks(select_window(ranked_class(), plan_of([4]), 0.2)) == [0, 1, 2, 3]


def test_k_one_hardest():
    assert picked_ranks(select_window(ranked_class(), plan_of([4]), 1.0)) == [6, 7, 8, 9]


def test_ties_broken_by_id():
    ds = ScoredDataset(ids=("d", "b", "a", "c"), labels=np.zeros(4, int), scores=np.ones(4))
    sel = select_window(ds, plan_of([2]), 1.0)
    assert sel.selected_ids == ("c", "d")


def test_endpoint_out_of_range():
    with pytest.raises(ConfigError):
        select_window(ranked_class(), plan_of([4]), 1.5)


def test_grid():
    assert WindowGrid(0.5).endpoints == (0.0, 0.5, 1.0)
    ks = WindowGrid(0.1).endpoints
    assert len(ks) == 11 and ks[3] == 0.3 and ks[-1] == 1.0
    assert WindowGrid(0.3).endpoints == (0.0, 0.3, 0.6, 0.9, 1.0)
    with pytest.raises(ConfigError):
        WindowGrid(0.0)


def test_full_budget_all_duplicates():
    ds = synthetic_dataset((5, 7))
    cands = enumerate_windows(ds, plan_of([5, 7]), WindowGrid(0.25))
    assert len(cands) == 5
    assert [c.duplicate for c in cands] == [False, True, True, True, True]


def test_small_k_duplicates_flagged():
    cands = enumerate_windows(ranked_class(), plan_of([4]), WindowGrid(0.1))
    # k = 0, 0.1, ..., 0.4 all clamp to [0, 4)
    assert [c.duplicate for c in cands[:5]] == [False, True, True, True, True]
    assert not cands[5].duplicate


def test_properties_random():
    rng = np.random.default_rng(0)
    for trial in range(20):
        sizes = tuple(int(x) for x in rng.integers(3, 60, size=int(rng.integers(2, 6))))
        ds = synthetic_dataset(sizes, d=2, seed=trial, with_features=False)
        alpha = float(rng.uniform(0.1, 0.8))
        plan = allocate_nonuniform(winsorized_class_difficulty(ds), alpha)
        order = ds.sorted_class_members
        prev_means = None
        for k, sel, _ in enumerate_windows(ds, plan, WindowGrid(0.1)):
            assert len(sel) == plan.total
            chosen = {ds.id_index[i] for i in sel.selected_ids}
            means = []
            for j, members in enumerate(order):
                pos = [r for r, m in enumerate(members) if m in chosen]
                assert len(pos) == plan.budgets[j]
                assert pos == list(range(pos[0], pos[0] + len(pos)))
                means.append(ds.scores[members[pos]].mean())
            if prev_means is not None:
                assert all(m >= p - 1e-12 for m, p in zip(means, prev_means))
            prev_means = means


def test_deterministic():
    ds = synthetic_dataset((30, 30), seed=5)
    plan = allocate_nonuniform(winsorized_class_difficulty(ds), 0.6)
    a = select_window(ds, plan, 0.7)
    b = select_window(ds, plan, 0.7)
    assert a.selected_ids == b.selected_ids
