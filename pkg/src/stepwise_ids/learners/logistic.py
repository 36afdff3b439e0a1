"""L2-regularized binary logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import Diverged
from .base import TrainConfig, check_width, threshold_labels, training_arrays

# A step that raises the loss is retried at half the rate, at most this many times.
MAX_HALVINGS = 8


@dataclass(eq=False)
class LogisticModel:
    weights: np.ndarray
    bias: float
    n_features: int
    schema_fingerprint: str = ""
    loss_history: list = field(default_factory=list)

    kind = "logistic"

    def decision_function(self, X) -> np.ndarray:
        return check_width(self, X) @ self.weights + self.bias

    def score(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return threshold_labels(self.score(X), threshold)


def loss_and_grad(w, b, X, y, l2):
    """Mean log-loss plus ``l2/2 * |w|^2`` and its gradient (the bias is not penalised)."""
    # overflow surfaces as a non-finite loss, which the caller reports as Diverged
    with np.errstate(over="ignore", invalid="ignore"):
        z = X @ w + b
        loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))
        residual = expit(z) - y
        grad_w = X.T @ residual / len(y) + l2 * w
    grad_b = float(residual.mean())
    return loss, grad_w, grad_b


def fit_logistic(X, y, cfg: TrainConfig, schema_fingerprint: str = "") -> LogisticModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.zeros(X.shape[1])
    b = 0.0
    loss, gw, gb = loss_and_grad(w, b, X, y, cfg.l2)
    history = [loss]
    rate = cfg.learning_rate
    for _ in range(cfg.epochs):
        halvings = 0
        while True:
            w_new = w - rate * gw
            b_new = b - rate * gb
            new_loss, new_gw, new_gb = loss_and_grad(w_new, b_new, X, y, cfg.l2)
            if not (np.isfinite(new_loss) and np.isfinite(w_new).all() and np.isfinite(b_new)):
                raise Diverged(f"loss became non-finite at learning rate {rate:g}")
            if new_loss <= loss:
                break
            if rate * (gw @ gw + gb * gb) < cfg.convergence_tol:
                # At the optimum up to rounding; no step can improve.
                return LogisticModel(w, b, X.shape[1], schema_fingerprint, history)
            halvings += 1
            if halvings > MAX_HALVINGS:
                raise Diverged(
                    f"loss keeps increasing (learning rate {cfg.learning_rate:g} is too large)"
                )
            rate /= 2
        improvement = loss - new_loss
        w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
        history.append(loss)
        if improvement < cfg.convergence_tol:
            break
    return LogisticModel(w, float(b), X.shape[1], schema_fingerprint, history)


def train_logistic(d, cfg: TrainConfig = None) -> LogisticModel:
    cfg = cfg or TrainConfig(kind="logistic")
    X, y = training_arrays(d)
    return fit_logistic(X, y, cfg, d.schema.fingerprint())
