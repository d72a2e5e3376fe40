"""Dataset builders shared by several test modules"""

from pathlib import Path

import numpy as np

from amr_toolkit.core.data_ingest import Dataset


ROOT = Path(__file__).resolve().parent.parent
DATASETS_DIR = ROOT / "datasets"


def make_dataset(X, y, name: str = "toy") -> Dataset:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return Dataset(X=X, y=y, feature_names=tuple(f"f{j + 1}" for j in range(X.shape[1])), name=name)


def random_dataset(rng: np.random.Generator, n: int, m: int, name: str = "random") -> Dataset:
    """Small integer regressors (plenty of distance ties), no all-zero rows"""
    X = rng.integers(0, 4, size=(n, m)).astype(float)
    X[X.sum(axis=1) == 0, 0] = 1.0
    y = np.round(rng.normal(10.0, 3.0, size=n), 3)
    return make_dataset(X, y, name)
