"""Shared fixtures for the AMR toolkit tests"""

from pathlib import Path

import numpy as np
import pytest

from .helpers import DATASETS_DIR, make_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def linear_dataset():
    # y = 1 + 2 x1 - x2 exactly
    X = [[1, 2], [2, 1], [3, 5], [4, 2], [5, 7], [6, 1], [7, 3], [8, 8]]
    y = [1 + 2 * a - b for a, b in X]
    return make_dataset(X, y, "linear")


@pytest.fixture
def sample_conf():
    return DATASETS_DIR / "sample.conf"


@pytest.fixture
def write_file(tmp_path):
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path
    return _write
