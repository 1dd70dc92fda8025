import numpy as np
import pytest

from ztids._rand import child_rng
from ztids.dataset import Dataset


def separable(n: int = 200, gap: float = 2.0, seed: int = 0) -> Dataset:
    """Linearly separable 2-feature set, half per class."""
    rng = child_rng(seed, "separable")
    half = n // 2
    a = rng.normal(-gap, 0.5, size=(half, 2))
    b = rng.normal(gap, 0.5, size=(n - half, 2))
    X = np.vstack([a, b])
    y = np.concatenate([np.zeros(half, dtype=np.int64),
                        np.ones(n - half, dtype=np.int64)])
    order = rng.permutation(n)
    return Dataset(X[order], y[order], ["f0", "f1"], ["numeric", "numeric"])


def numeric_dataset(X, y=None, prefix: str = "f") -> Dataset:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if y is None:
        y = np.zeros(X.shape[0], dtype=np.int64)
        y[: X.shape[0] // 2] = 1
    names = [f"{prefix}{j}" for j in range(X.shape[1])]
    return Dataset(X, np.asarray(y), names, ["numeric"] * X.shape[1])


@pytest.fixture(scope="session")
def flows_small():
    from ztids.simdata import make_flows
    return make_flows(n_rows=900, seed=3)
