"""Mini-batch training loop for the classifier networks."""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidInputError, NumericError
from .network import Network
from .optimizer import OptimizerState, TrainConfig, nag_step


def train(
    net: Network, images: np.ndarray, labels: np.ndarray, config: TrainConfig
) -> list[float]:
    """Train in place; returns the per-epoch mean loss history.

    Each epoch shuffles with the seeded generator, then walks
    consecutive mini-batches: forward with training-mode dropout,
    backprop, NAG step. Bit-reproducible for a fixed (seed, data,
    config).
    """
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels)
    n = images.shape[0]
    if n == 0:
        raise InvalidInputError("empty training set")
    if labels.shape[0] != n:
        raise InvalidInputError(f"{n} images but {labels.shape[0]} labels")
    rng = np.random.default_rng(config.seed)
    state = OptimizerState.for_params(net.parameters())
    history: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = net.loss_and_grads(
                images[idx], labels[idx], rng=rng, training=True
            )
            if not math.isfinite(loss):
                raise NumericError(f"non-finite training loss {loss}")
            nag_step(
                net.parameters(), grads, state, config.learning_rate, config.momentum
            )
            total += loss * len(idx)
        history.append(total / n)
    return history


def evaluate(
    net: Network, images: np.ndarray, labels: np.ndarray, batch_size: int = 200
) -> tuple[float, float]:
    """(accuracy, mean NLL) on a labeled set, inference mode."""
    from .layers import nll_loss

    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels)
    n = images.shape[0]
    if n == 0:
        raise InvalidInputError("empty evaluation set")
    correct = 0
    total_loss = 0.0
    for start in range(0, n, batch_size):
        xb = images[start : start + batch_size]
        yb = labels[start : start + batch_size]
        probs = net.predict_proba(xb)
        correct += int((np.argmax(probs, axis=1) == yb).sum())
        total_loss += nll_loss(probs, yb) * len(yb)
    return correct / n, total_loss / n
