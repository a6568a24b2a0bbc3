"""Exit criteria for the package, one test per criterion.

Each test records a one-line verdict that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.optimize import minimize

from nucs.baselines import (
    select_bws,
    select_ccs,
    select_ccs_cp,
    select_hard,
    select_moderate,
    select_random,
)
from nucs.budget import allocate_nonuniform, allocate_uniform
from nucs.cli import main
from nucs.data import ScoredDataset, save_dataset
from nucs.difficulty import ClassDifficultyTable, winsorized_class_difficulty, winsorized_mean_sorted
from nucs.gaussian import (
    GaussianTwoClassModel,
    error_rate,
    optimal_constrained,
    optimal_interior,
    regime_of,
)
from nucs.pipeline import select_nucs
from nucs.ridge import RidgeConfig, fit_ridge, one_hot, proxy_accuracy
from nucs.window import WindowGrid, enumerate_windows

from conftest import record, synthetic_dataset


def brute_force_minimum(model, n_t=801, n_f=201):
    """Grid over (t, f0) followed by bounded local refinement of E."""
    lo_t, hi_t = model.t_bounds()
    lo_f, hi_f = model.f0_range
    ts = np.linspace(lo_t, hi_t, n_t)
    fs = np.linspace(lo_f, hi_f, n_f)
    e = np.array([error_rate(model, ts, f0) for f0 in fs])
    i, j = np.unravel_index(np.argmin(e), e.shape)
    res = minimize(lambda v: error_rate(model, v[0], float(np.clip(v[1], lo_f, hi_f))),
                   x0=[ts[j], fs[i]], method="L-BFGS-B",
                   bounds=[(lo_t, hi_t), (lo_f, hi_f)])
    if res.fun <= e[i, j]:
        return float(res.fun), float(res.x[0]), float(res.x[1])
    return float(e[i, j]), float(ts[j]), float(fs[i])


def random_interior_models(rng, count):
    out = []
    while len(out) < count:
        mu = np.sort(rng.uniform(-5, 5, 2))
        if mu[0] == mu[1]:
            continue
        s = rng.uniform(0.2, 5, 2)
        f = float(rng.uniform(1e-3, 0.5))
        m = GaussianTwoClassModel(mu[0], mu[1], s[0], s[1], f)
        if regime_of(m) == "interior":
            out.append(m)
    return out


def test_criterion_1_gaussian_closed_form():
    start = time.perf_counter()
    _, f0, _ = optimal_interior(GaussianTwoClassModel(0.0, 1.0, 1.0, 2.0, 0.3))
    worked_ok = abs(f0 - 0.2) <= 1e-15

    rng = np.random.default_rng(2024)
    worst_e = worst_arg = 0.0
    for m in random_interior_models(rng, 100):
        t, f0, _ = optimal_interior(m)
        e_min, t_min, f0_min = brute_force_minimum(m)
        worst_e = max(worst_e, error_rate(m, t, f0) - e_min)
        worst_arg = max(worst_arg, abs(t - t_min), abs(f0 - f0_min))
    elapsed = time.perf_counter() - start

    agree_ok = worst_e <= 1e-4 and worst_arg <= 1e-3
    ok = worked_ok and agree_ok and elapsed < 5
    record(1, ok, f"worked f0*=0.2 {'ok' if worked_ok else 'WRONG'}; "
                  f"max E gap to 2-D minimizer {worst_e:.3g} (tol 1e-4), "
                  f"max arg gap {worst_arg:.3g} (tol 1e-3); {elapsed:.2f}s")
    assert worked_ok
    assert agree_ok, "closed-form point is a stationary point of E, not its minimum"
    assert elapsed < 5


def test_criterion_2_piecewise_allocator():
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    models = []
    by_regime = {"interior": 0, "cap0": 0, "cap1": 0}
    while len(models) < 100:
        mu = np.sort(rng.uniform(-5, 5, 2))
        s = rng.uniform(0.2, 5, 2)
        m = GaussianTwoClassModel(mu[0], mu[1], s[0], s[1], float(rng.uniform(1e-3, 1.0)))
        r = regime_of(m)
        if by_regime[r] >= 34:
            continue
        by_regime[r] += 1
        models.append(m)

    regime_ok = True
    worst = -math.inf
    for m in models:
        s0, s1, f = m.sigma0, m.sigma1, m.f
        expected = "cap0" if 2 * f * s0 / (s0 + s1) > 1 else "cap1" if 2 * f * s1 / (s0 + s1) > 1 else "interior"
        opt = optimal_constrained(m)
        regime_ok &= opt.regime == expected
        worst = max(worst, error_rate(m, opt.t, opt.f0) - brute_force_minimum(m)[0])
    elapsed = time.perf_counter() - start

    oracle_ok = worst <= 1e-4
    ok = regime_ok and oracle_ok and elapsed < 5
    record(2, ok, f"regimes {by_regime} classification {'ok' if regime_ok else 'WRONG'}; "
                  f"max E above grid-oracle minimum {worst:.3g} (tol 1e-4); {elapsed:.2f}s")
    assert regime_ok
    assert oracle_ok, "piecewise allocation does not attain the minimum of E"
    assert elapsed < 5


def clamp_then_mean(values, gamma):
    s = np.sort(values)
    n = s.size
    k = math.floor(gamma * n + 1e-9)
    return float(np.clip(s, s[k], s[n - k - 1]).mean())


def test_criterion_3_winsorized_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = worst_mean = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 501))
        gamma = float(rng.choice([0.0, 0.05, 0.25]))
        s = rng.normal(0.0, 1.0, n) * rng.uniform(0.1, 3.0)
        got = winsorized_mean_sorted(np.sort(s), gamma)
        worst = max(worst, abs(got - clamp_then_mean(s, gamma)))
        if gamma == 0.0:
            worst_mean = max(worst_mean, abs(got - s.mean()))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and worst_mean <= 1e-12 and elapsed < 2
    record(3, ok, f"max |winsorized - clamp oracle| {worst:.2g}, max |gamma=0 - mean| {worst_mean:.2g}; {elapsed:.2f}s")
    assert ok


def test_criterion_4_budget_invariants():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    done = 0
    failures = []
    while done < 1000:
        n_classes = int(rng.integers(2, 40))
        # draw sizes from a short list so that equal-size classes are common
        counts = rng.choice([5, 20, 64, 150, 400], size=n_classes)
        diff = rng.lognormal(0.0, 0.8, n_classes)
        alpha = float(rng.uniform(0.01, 0.99))
        total = math.floor((1 - alpha) * counts.sum() + 1e-9)
        if total < n_classes:
            continue
        done += 1
        table = ClassDifficultyTable(counts, diff, 0.05)
        plan = allocate_nonuniform(table, alpha)
        b = plan.budgets
        if b.sum() != total or b.min() < 1 or (b > counts).any():
            failures.append(("conservation/bounds", done))
        scaled = allocate_nonuniform(ClassDifficultyTable(counts, diff * 3.5, 0.05), alpha)
        if not np.array_equal(scaled.budgets, b):
            failures.append(("scale", done))
        free = np.flatnonzero(~plan.capped)
        for a in free:
            same = free[(counts[free] == counts[a]) & (diff[free] < diff[a])]
            if (b[same] > b[a]).any():
                failures.append(("monotone", done))
                break
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 2
    record(4, ok, f"1000 instances, {len(failures)} violations; {elapsed:.2f}s")
    assert ok, failures[:5]


def test_criterion_5_window_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    violations = 0
    checked = 0
    for trial in range(30):
        sizes = tuple(int(x) for x in rng.integers(2, 80, size=int(rng.integers(2, 7))))
        ds = synthetic_dataset(sizes, seed=trial, with_features=False)
        # coarse scores create ties so the id tie-break is exercised
        ds = ScoredDataset(ids=ds.ids, labels=ds.labels, scores=np.round(ds.scores, 1))
        alpha = float(rng.uniform(0.05, 0.9))
        if math.floor((1 - alpha) * ds.n + 1e-9) < ds.n_classes:
            continue
        plan = allocate_nonuniform(winsorized_class_difficulty(ds), alpha)
        for k, sel, _ in enumerate_windows(ds, plan, WindowGrid(0.1)):
            chosen = {ds.id_index[i] for i in sel.selected_ids}
            for j, members in enumerate(ds.sorted_class_members):
                ranks = [r for r, m in enumerate(members) if m in chosen]
                n_j, b_j = members.size, int(plan.budgets[j])
                end = math.floor(k * n_j + 1e-9)
                expected = list(range(0, b_j)) if end < b_j else list(range(end - b_j, end))
                violations += ranks != expected
                checked += 1
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 2
    record(5, ok, f"{checked} class windows, {violations} violations; {elapsed:.2f}s")
    assert ok


def test_criterion_6_ridge_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 200))
        d = int(rng.integers(1, 50))
        y_classes = int(rng.integers(2, 8))
        lam = float(10 ** rng.uniform(-2, 2))
        x = rng.normal(size=(n, d))
        y = rng.integers(0, y_classes, n)
        w = fit_ridge(x, y, RidgeConfig(lam), y_classes)
        xb = np.hstack([x, np.ones((n, 1))])
        ref = np.linalg.solve(xb.T @ xb + lam * np.eye(d + 1), xb.T @ one_hot(y, y_classes))
        worst = max(worst, np.abs(w - ref).max() / max(np.abs(ref).max(), 1e-300))
    ds = synthetic_dataset((80, 80, 80), d=16, separation=15.0, seed=11)
    acc = proxy_accuracy(fit_ridge(ds.features, ds.labels, RidgeConfig(1.0), 3), ds)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and acc == 1.0 and elapsed < 10
    record(6, ok, f"max relative deviation {worst:.2g}; separable proxy accuracy {acc}; {elapsed:.2f}s")
    assert ok


def test_criterion_7_end_to_end_nucs():
    start = time.perf_counter()
    # class 3 scores are shifted by three within-class standard deviations
    ds = synthetic_dataset((200,) * 5, d=12, separation=2.5, seed=17, score_shift=[0, 0, 0, 0.9, 0])
    hard = 3
    table = winsorized_class_difficulty(ds)
    details = []
    ok = True
    for alpha in (0.3, 0.5, 0.7, 0.9):
        nu = allocate_nonuniform(table, alpha).budgets
        un = allocate_uniform(table, alpha).budgets
        rate_nu = nu[hard] / ds.class_counts[hard]
        rate_un = un[hard] / ds.class_counts[hard]
        run = select_nucs(ds, alpha)
        size_ok = len(run.selection) == math.floor((1 - alpha) * ds.n + 1e-9)
        k_ok = run.proxy.chosen_k in WindowGrid(0.1).endpoints
        ok &= rate_nu > rate_un and size_ok and k_ok
        details.append(f"a={alpha}: rate {rate_nu:.3f}>{rate_un:.3f} k*={run.proxy.chosen_k}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    record(7, ok, "; ".join(details) + f"; {elapsed:.2f}s")
    assert ok


def test_criterion_8_baseline_contracts():
    start = time.perf_counter()
    ds = synthetic_dataset((120, 45, 80, 15, 60), d=8, seed=8, score_shift=[0, 0.4, 1, 2, 0.2])
    problems = []
    for alpha in (0.2, 0.5, 0.8):
        size = math.floor((1 - alpha) * ds.n + 1e-9)
        uniform = allocate_uniform(ds.class_counts, alpha).budgets.tolist()
        sels = {
            "random": select_random(ds, alpha, 1),
            "el2n-hard": select_hard(ds, alpha),
            "ccs": select_ccs(ds, alpha, 0.0, 50, 1),
            "ccs-cp": select_ccs_cp(ds, alpha, 0.0, 50, 1),
            "moderate": select_moderate(ds, alpha),
            "bws": select_bws(ds, alpha),
        }
        for name, sel in sels.items():
            if len(sel) != size:
                problems.append(f"{name} size at {alpha}")
            if name in ("ccs-cp", "moderate", "bws"):
                if [sel.per_class_counts[j] for j in range(ds.n_classes)] != uniform:
                    problems.append(f"{name} class counts at {alpha}")
    if not set(select_hard(ds, 0.8).selected_ids) <= set(select_hard(ds, 0.5).selected_ids):
        problems.append("hard nesting")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 5
    record(8, ok, f"{len(problems)} contract violations; {elapsed:.2f}s")
    assert ok, problems


def test_criterion_9_headline_tables_not_reproduced():
    record(9, "SKIP", "fine-tuning accuracy tables need full datasets and pretrained backbones; "
                      "covered by criteria 1-8")
    pytest.skip("headline accuracy tables are out of scope at desk scale")


def test_criterion_10_determinism(tmp_path):
    ds = synthetic_dataset((50, 35, 25), d=6, seed=10, score_shift=[0, 1, 0.5])
    save_dataset(ds, tmp_path / "l.csv", tmp_path / "s.csv", tmp_path / "f.bin")
    common = ["select", "--labels", str(tmp_path / "l.csv"), "--scores", str(tmp_path / "s.csv"),
              "--features", str(tmp_path / "f.bin"), "--alpha", "0.6", "--seed", "5"]
    mismatches = []
    methods = ["nucs", "random", "el2n-hard", "moderate", "ccs", "bws", "ccs-cp"]
    for method in methods:
        outs = []
        for rep in range(2):
            sel, report = tmp_path / f"{method}{rep}.csv", tmp_path / f"{method}{rep}.json"
            args = common + ["--method", method, "--out", str(sel), "--report", str(report)]
            if method == "nucs" and rep == 1:
                # separate interpreter, different hash seed
                r = subprocess.run([sys.executable, "-m", "nucs", *args], capture_output=True,
                                   env={**os.environ, "PYTHONHASHSEED": "123"})
                assert r.returncode == 0, r.stderr
            else:
                assert main(args) == 0
            outs.append((sel.read_bytes(), report.read_bytes()))
        if outs[0] != outs[1]:
            mismatches.append(method)
    ok = not mismatches
    record(10, ok, f"{len(methods)} methods, byte-identical outputs; mismatches {mismatches}")
    assert ok
