"""Two-hidden-layer perceptron trained with mini-batch SGD.

Architecture: input -> hidden_units ReLU -> hidden_units ReLU -> 1 sigmoid,
binary cross-entropy loss, momentum 0.9. This is the only learner exposing
exact input gradients (backpropagated through the whole network), which the
gradient-based evasion attacks rely on.
"""
from __future__ import annotations

import numpy as np

from .._rand import child_rng
from .base import TrainedModel

_EPS = 1e-12


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class MlpModel(TrainedModel):
    kind = "MLP"

    def __init__(self, learning_rate: float = 0.05, hidden_units: int = 64,
                 epochs: int = 60, batch_size: int = 64, momentum: float = 0.9,
                 seed: int = 0) -> None:
        super().__init__()
        self.learning_rate = float(learning_rate)
        self.hidden_units = int(hidden_units)
        self.epochs = int(epochs)
        self.batch_size = int(batch_size)
        self.momentum = float(momentum)
        self.seed = int(seed)
        self.params = {"learning_rate": self.learning_rate,
                       "hidden_units": self.hidden_units}
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []

    def fit(self, X, y) -> "MlpModel":
        X, y = self._check_training(X, y)
        n, m = X.shape
        h = self.hidden_units
        rng = child_rng(self.seed, "mlp-init")
        sizes = [(m, h), (h, h), (h, 1)]
        self.weights = [rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
                        for fan_in, fan_out in sizes]
        self.biases = [np.zeros(fan_out) for _, fan_out in sizes]
        vel_w = [np.zeros_like(w) for w in self.weights]
        vel_b = [np.zeros_like(b) for b in self.biases]
        yf = y.astype(np.float64)

        shuffle = child_rng(self.seed, "mlp-shuffle")
        for _ in range(self.epochs):
            order = shuffle.permutation(n)
            for s in range(0, n, self.batch_size):
                idx = order[s:s + self.batch_size]
                xb, yb = X[idx], yf[idx]
                a1 = np.maximum(xb @ self.weights[0] + self.biases[0], 0.0)
                a2 = np.maximum(a1 @ self.weights[1] + self.biases[1], 0.0)
                p = _sigmoid(a2 @ self.weights[2] + self.biases[2]).ravel()
                # BCE with sigmoid: dL/dz = (p - y) / batch
                dz3 = ((p - yb) / idx.size)[:, None]
                gw2 = a2.T @ dz3
                da2 = dz3 @ self.weights[2].T
                dz2 = da2 * (a2 > 0)
                gw1 = a1.T @ dz2
                da1 = dz2 @ self.weights[1].T
                dz1 = da1 * (a1 > 0)
                gw0 = xb.T @ dz1
                grads_w = [gw0, gw1, gw2]
                grads_b = [dz1.sum(axis=0), dz2.sum(axis=0), dz3.sum(axis=0).ravel()]
                for l in range(3):
                    vel_w[l] = self.momentum * vel_w[l] - self.learning_rate * grads_w[l]
                    vel_b[l] = self.momentum * vel_b[l] - self.learning_rate * grads_b[l]
                    self.weights[l] += vel_w[l]
                    self.biases[l] += vel_b[l]
        self.n_features_in = m
        return self

    def _forward(self, X: np.ndarray):
        a1 = np.maximum(X @ self.weights[0] + self.biases[0], 0.0)
        a2 = np.maximum(a1 @ self.weights[1] + self.biases[1], 0.0)
        p = _sigmoid(a2 @ self.weights[2] + self.biases[2]).ravel()
        return a1, a2, p

    def predict_proba(self, X) -> np.ndarray:
        X = self._check_X(X)
        return self._forward(X)[2]

    def input_gradient(self, X, y) -> np.ndarray:
        """d BCE / d x per row, exact via backprop."""
        X = self._check_X(X)
        y = np.asarray(y, dtype=np.float64).ravel()
        a1, a2, p = self._forward(X)
        dz3 = (p - y)[:, None]
        da2 = dz3 @ self.weights[2].T
        dz2 = da2 * (a2 > 0)
        da1 = dz2 @ self.weights[1].T
        dz1 = da1 * (a1 > 0)
        return dz1 @ self.weights[0].T

    def loss(self, X, y) -> float:
        p = np.clip(self.predict_proba(X), _EPS, 1.0 - _EPS)
        y = np.asarray(y, dtype=np.float64).ravel()
        return float(np.mean(-y * np.log(p) - (1 - y) * np.log(1 - p)))
