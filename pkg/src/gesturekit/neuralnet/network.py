"""Network assembly: layer specs, initialization, and probability fusion.

A network is described by an ordered list of LayerSpec records plus an
input shape (H, W, C). Conv and dense specs may carry an inline
activation ("relu" or "softmax", mirroring how summary tables list such
architectures); bare `relu`/`softmax` specs are also accepted. The last
activation must be a single softmax.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateFusionError, InvalidInputError
from .layers import (
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    Layer,
    MaxPool2x2,
    ReLU,
    Softmax,
    nll_loss,
)

KINDS = ("conv2d", "maxpool2x2", "dropout", "flatten", "dense", "relu", "softmax")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    filters: int | None = None
    kernel_size: int | None = None
    units: int | None = None
    rate: float | None = None
    activation: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown layer kind {self.kind!r}")
        if self.kind == "conv2d" and (not self.filters or not self.kernel_size):
            raise InvalidInputError("conv2d spec needs filters and kernel_size")
        if self.kind == "dense" and not self.units:
            raise InvalidInputError("dense spec needs units")
        if self.kind == "dropout" and self.rate is None:
            raise InvalidInputError("dropout spec needs a rate")
        if self.activation not in (None, "relu", "softmax"):
            raise InvalidInputError(f"unknown activation {self.activation!r}")

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for key in ("filters", "kernel_size", "units", "rate", "activation"):
            value = getattr(self, key)
            if value is not None:
                d[key] = value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LayerSpec":
        return cls(**d)


def figure1_specs(
    num_classes: int = 10,
    dropout_rates: tuple[float, float] = (0.25, 0.5),
) -> list[LayerSpec]:
    """The two-conv classifier family; pair with an (H, W, C) input shape."""
    return [
        LayerSpec("conv2d", filters=32, kernel_size=3, activation="relu"),
        LayerSpec("conv2d", filters=64, kernel_size=3, activation="relu"),
        LayerSpec("maxpool2x2"),
        LayerSpec("dropout", rate=dropout_rates[0]),
        LayerSpec("flatten"),
        LayerSpec("dense", units=128, activation="relu"),
        LayerSpec("dropout", rate=dropout_rates[1]),
        LayerSpec("dense", units=num_classes, activation="softmax"),
    ]


def lowres_input_shape(channels: int = 1) -> tuple[int, int, int]:
    return (28, 28, channels)


def highres_input_shape(channels: int = 1) -> tuple[int, int, int]:
    return (56, 56, channels)


def infer_shapes(specs: list[LayerSpec], input_shape) -> list[tuple]:
    """Output shape after each spec; validates shape compatibility."""
    shape = tuple(input_shape)
    shapes = []
    for spec in specs:
        if spec.kind == "conv2d":
            if len(shape) != 3:
                raise InvalidInputError(f"conv2d needs an (H, W, C) input, got {shape}")
            h, w, _ = shape
            k = spec.kernel_size
            if h < k or w < k:
                raise InvalidInputError(f"input {shape} smaller than {k}x{k} kernel")
            shape = (h - k + 1, w - k + 1, spec.filters)
        elif spec.kind == "maxpool2x2":
            if len(shape) != 3:
                raise InvalidInputError(f"maxpool2x2 needs an (H, W, C) input, got {shape}")
            h, w, c = shape
            if h % 2 or w % 2:
                raise InvalidInputError(f"maxpool2x2 needs even extents, got {h}x{w}")
            shape = (h // 2, w // 2, c)
        elif spec.kind == "flatten":
            shape = (int(np.prod(shape)),)
        elif spec.kind == "dense":
            if len(shape) != 1:
                raise InvalidInputError(f"dense needs a flat input, got {shape}")
            shape = (spec.units,)
        # dropout / relu / softmax keep their input shape
        shapes.append(shape)
    return shapes


def validate_specs(specs: list[LayerSpec], input_shape) -> None:
    """Shape compatibility plus the single-terminal-softmax rule."""
    if not specs:
        raise InvalidInputError("network needs at least one layer")
    infer_shapes(specs, input_shape)
    softmax_count = sum(
        (s.kind == "softmax") + (s.activation == "softmax") for s in specs
    )
    last = specs[-1]
    terminal = last.kind == "softmax" or last.activation == "softmax"
    if softmax_count != 1 or not terminal:
        raise InvalidInputError("network must end in exactly one softmax")


def count_params(specs: list[LayerSpec], input_shape) -> tuple[list[int], int]:
    """Per-spec trainable parameter counts and their total."""
    shape = tuple(input_shape)
    counts = []
    for spec, out_shape in zip(specs, infer_shapes(specs, input_shape)):
        if spec.kind == "conv2d":
            k, cin, cout = spec.kernel_size, shape[-1], spec.filters
            counts.append(k * k * cin * cout + cout)
        elif spec.kind == "dense":
            counts.append(shape[0] * spec.units + spec.units)
        else:
            counts.append(0)
        shape = out_shape
    return counts, sum(counts)


def fingerprint(specs: list[LayerSpec], input_shape) -> str:
    """Stable architecture hash over specs and input shape."""
    payload = json.dumps(
        {"input_shape": list(input_shape), "specs": [s.to_dict() for s in specs]},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def init_params(specs: list[LayerSpec], input_shape, seed: int) -> list[np.ndarray]:
    """Initial parameter tensors, in spec order (weights then bias each).

    Conv kernels draw from Uniform[-W_b, W_b] with W_b = 6/(n_i + n_o)
    where n_i = K*K*Cin and n_o = K*K*Cout. Dense weights draw from
    Normal(0, 0.01). All biases start at 1 except the final layer's,
    which start at 0.
    """
    validate_specs(specs, input_shape)
    rng = np.random.default_rng(seed)
    parameterized = [s for s in specs if s.kind in ("conv2d", "dense")]
    final = parameterized[-1] if parameterized else None
    shape = tuple(input_shape)
    params: list[np.ndarray] = []
    for spec, out_shape in zip(specs, infer_shapes(specs, input_shape)):
        if spec.kind == "conv2d":
            k, cin, cout = spec.kernel_size, shape[-1], spec.filters
            n_in, n_out = k * k * cin, k * k * cout
            bound = 6.0 / (n_in + n_out)
            params.append(rng.uniform(-bound, bound, size=(k, k, cin, cout)))
            params.append(np.zeros(cout) if spec is final else np.ones(cout))
        elif spec.kind == "dense":
            params.append(rng.normal(0.0, 0.01, size=(shape[0], spec.units)))
            params.append(np.zeros(spec.units) if spec is final else np.ones(spec.units))
        shape = out_shape
    return params


def build_layers(specs: list[LayerSpec], params: list[np.ndarray]) -> list[Layer]:
    """Runtime layers from specs; inline activations expand to layers."""
    layers: list[Layer] = []
    it = iter(params)
    for spec in specs:
        if spec.kind == "conv2d":
            layers.append(Conv2D(next(it), next(it)))
        elif spec.kind == "dense":
            layers.append(Dense(next(it), next(it)))
        elif spec.kind == "maxpool2x2":
            layers.append(MaxPool2x2())
        elif spec.kind == "dropout":
            layers.append(Dropout(spec.rate))
        elif spec.kind == "flatten":
            layers.append(Flatten())
        elif spec.kind == "relu":
            layers.append(ReLU())
        elif spec.kind == "softmax":
            layers.append(Softmax())
        if spec.activation == "relu":
            layers.append(ReLU())
        elif spec.activation == "softmax":
            layers.append(Softmax())
    return layers


class Network:
    """An ordered layer stack with its specs, parameters, and metadata."""

    def __init__(
        self,
        specs: list[LayerSpec],
        input_shape,
        seed: int = 0,
        params: list[np.ndarray] | None = None,
        config: dict | None = None,
    ):
        validate_specs(specs, input_shape)
        self.specs = list(specs)
        self.input_shape = tuple(input_shape)
        self.seed = seed
        self.config = dict(config or {})
        if params is None:
            params = init_params(specs, input_shape, seed)
        expected = [p.shape for p in init_shapes(specs, input_shape)]
        got = [np.asarray(p).shape for p in params]
        if got != expected:
            raise InvalidInputError(f"parameter shapes {got} do not match specs {expected}")
        self.layers = build_layers(self.specs, [np.asarray(p, dtype=np.float64) for p in params])
        self.fingerprint = fingerprint(self.specs, self.input_shape)

    @property
    def num_classes(self) -> int:
        return infer_shapes(self.specs, self.input_shape)[-1][0]

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads()]

    def forward(self, x, training=False, rng=None) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.input_shape:
            raise InvalidInputError(
                f"input shape {x.shape[1:]} does not match network {self.input_shape}"
            )
        for layer in self.layers:
            x = layer.forward(x, training=training, rng=rng)
        return x

    def backward(self, dprobs) -> None:
        dout = dprobs
        for i, layer in enumerate(reversed(self.layers)):
            is_input_layer = i == len(self.layers) - 1
            dout = layer.backward(dout, compute_dx=not is_input_layer)

    def loss_and_grads(self, x, labels, rng=None, training=True):
        """Mean NLL over the batch and gradients for every parameter."""
        probs = self.forward(x, training=training, rng=rng)
        labels = np.asarray(labels)
        loss = nll_loss(probs, labels)
        n, q = probs.shape
        picked = np.maximum(probs[np.arange(n), labels], 1e-12)
        dprobs = np.zeros_like(probs)
        dprobs[np.arange(n), labels] = -1.0 / (picked * n)
        self.backward(dprobs)
        return loss, self.gradients()

    def predict_proba(self, x) -> np.ndarray:
        return self.forward(x, training=False)

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)


def init_shapes(specs: list[LayerSpec], input_shape) -> list[np.ndarray]:
    """Zero tensors with the parameter shapes the specs imply."""
    shape = tuple(input_shape)
    out = []
    for spec, out_shape in zip(specs, infer_shapes(specs, input_shape)):
        if spec.kind == "conv2d":
            k, cin, cout = spec.kernel_size, shape[-1], spec.filters
            out.append(np.zeros((k, k, cin, cout)))
            out.append(np.zeros(cout))
        elif spec.kind == "dense":
            out.append(np.zeros((shape[0], spec.units)))
            out.append(np.zeros(spec.units))
        shape = out_shape
    return out


def fuse_predict(
    probs_low: np.ndarray, probs_high: np.ndarray
) -> tuple[np.ndarray, int]:
    """Elementwise product of two class-probability vectors, renormalized.

    Returns the fused probabilities and the argmax class (ties go to the
    lower index).
    """
    p = np.asarray(probs_low, dtype=np.float64)
    q = np.asarray(probs_high, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise InvalidInputError(f"probability shapes differ: {p.shape} vs {q.shape}")
    for name, v in (("probs_low", p), ("probs_high", q)):
        if not math.isclose(float(v.sum()), 1.0, abs_tol=1e-9):
            raise InvalidInputError(f"{name} must sum to 1 within 1e-9")
    fused = p * q
    total = fused.sum()
    if total <= 0.0:
        raise DegenerateFusionError("elementwise product of probabilities is zero")
    fused /= total
    return fused, int(np.argmax(fused))
