"""Nesterov-accelerated gradient updates.

With loss gradient g (descent convention), velocity v and parameter w
update as:

    v <- mu * v - lr * g
    w <- w + mu * v - lr * g

which is the lookahead form w <- w + mu^2 * v_prev - (1 + mu) * lr * g.
Setting mu = 0 reduces to plain SGD.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, NumericError


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 40
    epochs: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidInputError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidInputError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.batch_size < 1:
            raise InvalidInputError(f"batch_size must be positive, got {self.batch_size}")
        if self.epochs < 1:
            raise InvalidInputError(f"epochs must be positive, got {self.epochs}")


@dataclass
class OptimizerState:
    """One velocity tensor per parameter tensor, all starting at zero."""

    velocity: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[np.ndarray]) -> "OptimizerState":
        return cls(velocity=[np.zeros_like(p) for p in params])


def nag_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: OptimizerState,
    learning_rate: float,
    momentum: float,
) -> tuple[list[np.ndarray], OptimizerState]:
    """Apply one NAG update in place; returns the same params and state."""
    if learning_rate <= 0:
        raise InvalidInputError(f"learning_rate must be positive, got {learning_rate}")
    if not 0.0 <= momentum < 1.0:
        raise InvalidInputError(f"momentum must be in [0, 1), got {momentum}")
    if len(params) != len(grads) or len(params) != len(state.velocity):
        raise InvalidInputError(
            f"{len(params)} params, {len(grads)} grads, {len(state.velocity)} velocities"
        )
    for w, g, v in zip(params, grads, state.velocity):
        if w.shape != g.shape:
            raise InvalidInputError(f"param {w.shape} and gradient {g.shape} differ")
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient; aborting update")
        v *= momentum
        v -= learning_rate * g
        w += momentum * v - learning_rate * g
    return params, state
