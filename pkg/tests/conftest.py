import numpy as np
import pytest

from nucs.data import ScoredDataset


def synthetic_dataset(n_per_class=(40, 40, 40), d=8, seed=0, score_shift=None,
                      separation=6.0, with_features=True):
    """Gaussian clusters per class with positive scores; class j score mean 1 + shift[j]."""
    rng = np.random.default_rng(seed)
    n_classes = len(n_per_class)
    shift = np.zeros(n_classes) if score_shift is None else np.asarray(score_shift, float)
    centers = rng.normal(0.0, separation, size=(n_classes, d))
    ids, labels, scores, feats = [], [], [], []
    for j, n in enumerate(n_per_class):
        for i in range(n):
            ids.append(f"c{j}_{i:05d}")
        labels.extend([j] * n)
        scores.append(np.abs(rng.normal(1.0 + shift[j], 0.3, n)) + 1e-3)
        feats.append(centers[j] + rng.normal(0.0, 1.0, size=(n, d)))
    features = np.vstack(feats).astype(np.float32) if with_features else None
    return ScoredDataset(
        ids=tuple(ids),
        labels=np.array(labels),
        scores=np.concatenate(scores),
        features=features,
    )


@pytest.fixture
def small_ds():
    return synthetic_dataset()


@pytest.fixture
def make_ds():
    return synthetic_dataset


ACCEPTANCE_LINES = []


def record(criterion, ok, detail=""):
    status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
    ACCEPTANCE_LINES.append(f"criterion {criterion}: {status}  {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
