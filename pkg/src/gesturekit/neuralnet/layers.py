"""From-scratch network layers with explicit forward/backward passes.

Tensors are float64 numpy arrays, channels-last: a batch of images is
(N, H, W, C), a batch of vectors (N, D). Each layer caches what its
backward pass needs; backward returns the gradient w.r.t. the layer
input and accumulates parameter gradients on the layer.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, z)."""
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction for overflow stability."""
    z = np.asarray(logits, dtype=np.float64)
    if z.size == 0:
        raise InvalidInputError("softmax of an empty tensor")
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def nll_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of the correct classes.

    Probabilities are clamped below at 1e-12 before the log so the loss
    stays finite.
    """
    probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels))
    if probs.shape[0] != labels.shape[0]:
        raise InvalidInputError(
            f"{probs.shape[0]} probability rows but {labels.shape[0]} labels"
        )
    sums = probs.sum(axis=1)
    if not np.all(np.abs(sums - 1.0) <= 1e-9):
        raise InvalidInputError("probability rows must sum to 1 within 1e-9")
    if labels.min() < 0 or labels.max() >= probs.shape[1]:
        raise InvalidInputError(
            f"label out of range [0, {probs.shape[1]}): {labels.min()}..{labels.max()}"
        )
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, 1e-12))))


def conv2d(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Valid cross-correlation plus per-output-channel bias (functional)."""
    layer = Conv2D(kernels, bias)
    single = np.asarray(x).ndim == 3
    out = layer.forward(x[None] if single else x)
    return out[0] if single else out


def dense(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map x @ W + b (functional)."""
    layer = Dense(weights, bias)
    single = np.asarray(x).ndim == 1
    out = layer.forward(np.asarray(x)[None] if single else x)
    return out[0] if single else out


def maxpool2x2(x: np.ndarray) -> np.ndarray:
    """Per-channel 2x2 block maximum (functional)."""
    single = np.asarray(x).ndim == 3
    out = MaxPool2x2().forward(x[None] if single else x)
    return out[0] if single else out


def dropout(
    x: np.ndarray, rate: float, rng: np.random.Generator, training: bool
) -> np.ndarray:
    """Inverted dropout: zero with probability `rate`, scale survivors."""
    layer = Dropout(rate)
    return layer.forward(np.asarray(x, dtype=np.float64), training=training, rng=rng)


class Layer:
    """Base layer; parameterless layers inherit the empty param lists."""

    def params(self) -> list[np.ndarray]:
        return []

    def grads(self) -> list[np.ndarray]:
        return []

    def forward(self, x, training=False, rng=None):
        raise NotImplementedError

    def backward(self, dout, compute_dx=True):
        raise NotImplementedError


def _im2col(x: np.ndarray, k: int):
    """(N, H, W, C) -> (N*OH*OW, k*k*C) patch matrix plus output dims."""
    win = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(1, 2))
    # (N, OH, OW, C, k, k) -> (N, OH, OW, k, k, C)
    win = win.transpose(0, 1, 2, 4, 5, 3)
    n, oh, ow = win.shape[:3]
    return np.ascontiguousarray(win).reshape(n * oh * ow, -1), oh, ow


class Conv2D(Layer):
    """Valid (no-padding) 2-D cross-correlation, channels-last.

    kernels: (K, K, Cin, Cout), bias: (Cout,).
    """

    def __init__(self, kernels: np.ndarray, bias: np.ndarray):
        kernels = np.asarray(kernels, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if kernels.ndim != 4 or kernels.shape[0] != kernels.shape[1]:
            raise InvalidInputError(f"kernels must be (K, K, Cin, Cout), got {kernels.shape}")
        if bias.shape != (kernels.shape[3],):
            raise InvalidInputError(
                f"bias shape {bias.shape} does not match {kernels.shape[3]} output channels"
            )
        self.kernels = kernels
        self.bias = bias
        self.d_kernels = np.zeros_like(kernels)
        self.d_bias = np.zeros_like(bias)
        self._cols = None
        self._in_shape = None

    def params(self):
        return [self.kernels, self.bias]

    def grads(self):
        return [self.d_kernels, self.d_bias]

    def forward(self, x, training=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        k, _, cin, cout = self.kernels.shape
        if x.ndim != 4 or x.shape[3] != cin:
            raise InvalidInputError(
                f"expected (N, H, W, {cin}) input, got shape {x.shape}"
            )
        if x.shape[1] < k or x.shape[2] < k:
            raise InvalidInputError(f"input {x.shape} smaller than {k}x{k} kernel")
        cols, oh, ow = _im2col(x, k)
        self._cols = cols
        self._in_shape = x.shape
        out = cols @ self.kernels.reshape(-1, cout) + self.bias
        return out.reshape(x.shape[0], oh, ow, cout)

    def backward(self, dout, compute_dx=True):
        k, _, cin, cout = self.kernels.shape
        n, oh, ow, _ = dout.shape
        dm = dout.reshape(-1, cout)
        self.d_kernels = (self._cols.T @ dm).reshape(self.kernels.shape)
        self.d_bias = dm.sum(axis=0)
        if not compute_dx:
            return None
        # full correlation of dout with spatially flipped kernels
        flipped = self.kernels[::-1, ::-1].transpose(0, 1, 3, 2)  # (K, K, Cout, Cin)
        pad = k - 1
        dpad = np.pad(dout, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
        cols, h, w = _im2col(dpad, k)
        dx = cols @ flipped.reshape(-1, cin)
        return dx.reshape(n, h, w, cin)


class MaxPool2x2(Layer):
    """2x2 max pooling; remembers argmax positions for the backward pass."""

    def __init__(self):
        self._idx = None
        self._shape = None

    def forward(self, x, training=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 4:
            raise InvalidInputError(f"expected (N, H, W, C) input, got shape {x.shape}")
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise InvalidInputError(f"spatial extents {h}x{w} must be even")
        blocks = (
            x.reshape(n, h // 2, 2, w // 2, 2, c)
            .transpose(0, 1, 3, 5, 2, 4)
            .reshape(n, h // 2, w // 2, c, 4)
        )
        self._idx = blocks.argmax(axis=-1)
        self._shape = x.shape
        return np.take_along_axis(blocks, self._idx[..., None], axis=-1)[..., 0]

    def backward(self, dout, compute_dx=True):
        n, h, w, c = self._shape
        dblocks = np.zeros((n, h // 2, w // 2, c, 4))
        np.put_along_axis(dblocks, self._idx[..., None], dout[..., None], axis=-1)
        return (
            dblocks.reshape(n, h // 2, w // 2, c, 2, 2)
            .transpose(0, 1, 4, 2, 5, 3)
            .reshape(n, h, w, c)
        )


class ReLU(Layer):
    def __init__(self):
        self._mask = None

    def forward(self, x, training=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout, compute_dx=True):
        return dout * self._mask


class Dropout(Layer):
    """Inverted dropout; identity at inference time."""

    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise InvalidInputError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self._scale_mask = None

    def forward(self, x, training=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        if not training or self.rate == 0.0:
            self._scale_mask = None
            return x
        if rng is None:
            raise InvalidInputError("training-mode dropout needs an rng")
        keep = rng.random(x.shape) >= self.rate
        self._scale_mask = keep / (1.0 - self.rate)
        return x * self._scale_mask

    def backward(self, dout, compute_dx=True):
        if self._scale_mask is None:
            return dout
        return dout * self._scale_mask


class Flatten(Layer):
    def __init__(self):
        self._shape = None

    def forward(self, x, training=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout, compute_dx=True):
        return dout.reshape(self._shape)


class Dense(Layer):
    """Affine layer: x @ W + b with W of shape (N_in, M)."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 2 or bias.shape != (weights.shape[1],):
            raise InvalidInputError(
                f"weights {weights.shape} and bias {bias.shape} are inconsistent"
            )
        self.weights = weights
        self.bias = bias
        self.d_weights = np.zeros_like(weights)
        self.d_bias = np.zeros_like(bias)
        self._x = None

    def params(self):
        return [self.weights, self.bias]

    def grads(self):
        return [self.d_weights, self.d_bias]

    def forward(self, x, training=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.weights.shape[0]:
            raise InvalidInputError(
                f"expected (N, {self.weights.shape[0]}) input, got shape {x.shape}"
            )
        self._x = x
        return x @ self.weights + self.bias

    def backward(self, dout, compute_dx=True):
        self.d_weights = self._x.T @ dout
        self.d_bias = dout.sum(axis=0)
        if not compute_dx:
            return None
        return dout @ self.weights.T


class Softmax(Layer):
    def __init__(self):
        self._probs = None

    def forward(self, x, training=False, rng=None):
        self._probs = softmax(x)
        return self._probs

    def backward(self, dout, compute_dx=True):
        p = self._probs
        return p * (dout - (dout * p).sum(axis=-1, keepdims=True))
