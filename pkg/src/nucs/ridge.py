"""Closed-form ridge proxy used to rank window candidates."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from ._util import thread_count
from .data import CoresetSelection, ScoredDataset
from .errors import ConfigError, DataError, NumericError


@dataclass(frozen=True)
class RidgeConfig:
    lam: float = 1.0
    bias: bool = True

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError(f"ridge regularization must be > 0, got {self.lam}")


@dataclass
class ProxyResult:
    scores: dict[float, float] = field(default_factory=dict)
    chosen_k: float | None = None


def design_matrix(features: np.ndarray, cfg: RidgeConfig) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DataError("features must be a 2-D matrix")
    if cfg.bias:
        x = np.hstack([x, np.ones((x.shape[0], 1))])
    return x


def one_hot(labels, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    y = np.zeros((labels.size, n_classes))
    y[np.arange(labels.size), labels] = 1.0
    return y


def fit_ridge(features, labels, cfg: RidgeConfig = RidgeConfig(), n_classes: int | None = None) -> np.ndarray:
    """Solve (X'X + lam I) W = X'Y for a one-hot target matrix Y.

    Uses the primal d x d system when n >= d and the dual n x n system
    ``W = X' (XX' + lam I)^-1 Y`` otherwise. Returns W of shape (d[+1], Y).
    """
    x = design_matrix(features, cfg)
    labels = np.asarray(labels, dtype=np.int64)
    n, d = x.shape
    if n < 1 or labels.shape != (n,):
        raise DataError("need at least one sample and one label per row")
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    y = one_hot(labels, n_classes)
    try:
        if n >= d:
            gram = x.T @ x
            gram[np.diag_indices_from(gram)] += cfg.lam
            w = linalg.cho_solve(linalg.cho_factor(gram), x.T @ y)
        else:
            gram = x @ x.T
            gram[np.diag_indices_from(gram)] += cfg.lam
            w = x.T @ linalg.cho_solve(linalg.cho_factor(gram), y)
    except linalg.LinAlgError as exc:
        raise NumericError(f"ridge factorization failed: {exc}") from exc

    rhs = x.T @ y
    resid = x.T @ (x @ w) + cfg.lam * w - rhs
    if np.abs(resid).max(initial=0.0) > 1e-6 * (1.0 + np.abs(rhs).max(initial=0.0)):
        raise NumericError("ridge solve failed the normal-equation residual check")
    return w


def predict(w: np.ndarray, features, cfg: RidgeConfig = RidgeConfig()) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. ties go to the lowest class
    return np.argmax(design_matrix(features, cfg) @ w, axis=1)


def proxy_accuracy(w: np.ndarray, ds: ScoredDataset, cfg: RidgeConfig = RidgeConfig()) -> float:
    """Accuracy of ``w`` over every sample of ``ds``."""
    if ds.features is None:
        raise DataError("proxy evaluation needs a feature matrix")
    expected_rows = ds.features.shape[1] + int(cfg.bias)
    if w.shape[0] != expected_rows:
        raise DataError(f"weight rows {w.shape[0]} do not match feature width {expected_rows}")
    return float(np.mean(predict(w, ds.features, cfg) == ds.labels))


def _score_selection(ds: ScoredDataset, sel: CoresetSelection, cfg: RidgeConfig) -> float:
    idx = np.fromiter((ds.id_index[i] for i in sel.selected_ids), dtype=np.int64)
    w = fit_ridge(ds.features[idx], ds.labels[idx], cfg, n_classes=ds.n_classes)
    return proxy_accuracy(w, ds, cfg)


def choose_optimal_window(candidates: Sequence, ds: ScoredDataset, cfg: RidgeConfig = RidgeConfig()):
    """Pick the window whose ridge fit scores best on the full dataset.

    Candidates with identical selections are solved once. Ties go to the
    larger k. Returns ``(k_star, selection, ProxyResult)``.
    """
    if not candidates:
        raise ConfigError("no window candidates to choose from")
    if ds.features is None:
        raise DataError("window choice needs a feature matrix")
    cands = sorted(((c[0], c[1]) for c in candidates), key=lambda c: c[0])

    unique: dict[frozenset, CoresetSelection] = {}
    keys = []
    for _, sel in cands:
        key = frozenset(sel.selected_ids)
        unique.setdefault(key, sel)
        keys.append(key)

    items = list(unique.items())
    workers = min(thread_count(), len(items))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accs = list(pool.map(lambda kv: _score_selection(ds, kv[1], cfg), items))
    else:
        accs = [_score_selection(ds, sel, cfg) for _, sel in items]
    acc_of = {key: acc for (key, _), acc in zip(items, accs)}

    result = ProxyResult()
    best = None
    for (k, sel), key in zip(cands, keys):
        acc = acc_of[key]
        result.scores[k] = acc
        if best is None or acc >= best[0]:
            best = (acc, k, sel)
    result.chosen_k = best[1]
    return best[1], best[2], result


def bias_metrics(predictions, labels, n_classes: int | None = None) -> tuple[float, float]:
    """Worst-class recall and the spread between best and worst class recall."""
    pred = np.asarray(predictions)
    lab = np.asarray(labels)
    if pred.shape != lab.shape or lab.ndim != 1 or lab.size == 0:
        raise DataError("predictions and labels must be equal-length non-empty vectors")
    classes = np.unique(lab)
    if n_classes is not None:
        absent = sorted(set(range(n_classes)) - set(classes.tolist()))
        if absent:
            raise DataError(f"classes {absent} do not appear in labels")
    recalls = np.array([np.mean(pred[lab == c] == c) for c in classes])
    return float(recalls.min()), float(recalls.max() - recalls.min())
