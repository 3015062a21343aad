"""Variational autoencoder with a Gaussian encoder and Bernoulli decoder.

One hidden ReLU layer on each side, a 2-D latent space by default, and
sigmoid outputs interpreted as per-pixel Bernoulli means. Trained by
maximizing the variational lower bound (minimizing its negative) with
the shared NAG optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FormatError,
    InvalidInputError,
    NumericError,
    UnsupportedConfigError,
)
from .neuralnet.model_io import read_gnet, write_gnet
from .neuralnet.optimizer import OptimizerState, nag_step

MEAN_CLAMP = 1e-7


@dataclass
class VaeConfig:
    input_dim: int = 784
    hidden: int = 256
    latent: int = 2
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 50
    epochs: int = 20
    seed: int = 0


@dataclass
class VaeParams:
    """Encoder/decoder weights in fixed serialization order."""

    w_enc: np.ndarray
    b_enc: np.ndarray
    w_mu: np.ndarray
    b_mu: np.ndarray
    w_lv: np.ndarray
    b_lv: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray
    seed: int = 0
    config: dict = field(default_factory=dict)

    @property
    def input_dim(self) -> int:
        return self.w_enc.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.w_mu.shape[1]

    def parameters(self) -> list[np.ndarray]:
        return [
            self.w_enc, self.b_enc, self.w_mu, self.b_mu, self.w_lv,
            self.b_lv, self.w_dec, self.b_dec, self.w_out, self.b_out,
        ]

    @classmethod
    def from_arrays(cls, arrays, seed=0, config=None) -> "VaeParams":
        if len(arrays) != 10:
            raise InvalidInputError(f"expected 10 parameter tensors, got {len(arrays)}")
        return cls(*[np.asarray(a, dtype=np.float64) for a in arrays],
                   seed=seed, config=dict(config or {}))

    @classmethod
    def init(cls, input_dim: int, hidden: int = 256, latent: int = 2,
             seed: int = 0) -> "VaeParams":
        """Weights from Normal(0, 0.01), biases zero; deterministic per seed."""
        rng = np.random.default_rng(seed)
        s = 0.01
        return cls(
            w_enc=rng.normal(0, s, (input_dim, hidden)), b_enc=np.zeros(hidden),
            w_mu=rng.normal(0, s, (hidden, latent)), b_mu=np.zeros(latent),
            w_lv=rng.normal(0, s, (hidden, latent)), b_lv=np.zeros(latent),
            w_dec=rng.normal(0, s, (latent, hidden)), b_dec=np.zeros(hidden),
            w_out=rng.normal(0, s, (hidden, input_dim)), b_out=np.zeros(input_dim),
            seed=seed,
        )

    @classmethod
    def zeros(cls, input_dim: int, hidden: int = 256, latent: int = 2) -> "VaeParams":
        return cls(
            w_enc=np.zeros((input_dim, hidden)), b_enc=np.zeros(hidden),
            w_mu=np.zeros((hidden, latent)), b_mu=np.zeros(latent),
            w_lv=np.zeros((hidden, latent)), b_lv=np.zeros(latent),
            w_dec=np.zeros((latent, hidden)), b_dec=np.zeros(hidden),
            w_out=np.zeros((hidden, input_dim)), b_out=np.zeros(input_dim),
        )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _as_batch(x: np.ndarray, dim: int, name: str) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None]
    if x.ndim != 2 or x.shape[1] != dim:
        raise InvalidInputError(f"{name} must have {dim} components, got shape {x.shape}")
    return x, single


def encode(x: np.ndarray, params: VaeParams) -> tuple[np.ndarray, np.ndarray]:
    """Latent Gaussian parameters (mu, log_var) for an input in [0,1]^N."""
    x, single = _as_batch(x, params.input_dim, "x")
    h = np.maximum(x @ params.w_enc + params.b_enc, 0.0)
    mu = h @ params.w_mu + params.b_mu
    lv = h @ params.w_lv + params.b_lv
    return (mu[0], lv[0]) if single else (mu, lv)


def reparameterize(mu: np.ndarray, log_var: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """z = mu + exp(log_var / 2) * eps, elementwise."""
    mu = np.asarray(mu, dtype=np.float64)
    log_var = np.asarray(log_var, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    return mu + np.exp(log_var / 2.0) * eps


def decode(z: np.ndarray, params: VaeParams) -> np.ndarray:
    """Bernoulli means: sigmoid-terminated decoder forward pass."""
    z, single = _as_batch(z, params.latent_dim, "z")
    h = np.maximum(z @ params.w_dec + params.b_dec, 0.0)
    means = _sigmoid(h @ params.w_out + params.b_out)
    return means[0] if single else means


def kl_gaussian(mu: np.ndarray, log_var: np.ndarray):
    """KL(N(mu, sigma^2) || N(0, 1)) = -1/2 sum(1 + log var - mu^2 - var)."""
    mu = np.asarray(mu, dtype=np.float64)
    log_var = np.asarray(log_var, dtype=np.float64)
    terms = 1.0 + log_var - mu**2 - np.exp(log_var)
    if mu.ndim <= 1:
        return float(-0.5 * terms.sum())
    return -0.5 * terms.sum(axis=-1)


def elbo(x: np.ndarray, recon: np.ndarray, mu: np.ndarray, log_var: np.ndarray):
    """Bernoulli log-likelihood of x under recon, minus the KL term.

    Single-sample Monte-Carlo estimate; recon values are clamped to
    [1e-7, 1 - 1e-7] before the logs.
    """
    x = np.asarray(x, dtype=np.float64)
    r = np.clip(np.asarray(recon, dtype=np.float64), MEAN_CLAMP, 1.0 - MEAN_CLAMP)
    ll = (x * np.log(r) + (1.0 - x) * np.log(1.0 - r)).sum(axis=-1)
    result = ll - kl_gaussian(mu, log_var)
    return float(result) if np.ndim(result) == 0 else result


def loss_and_grads(
    params: VaeParams, x: np.ndarray, eps: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Mean negative ELBO over the batch and its parameter gradients.

    The noise draws are passed in, so the loss is a deterministic
    function of (params, x, eps) and finite-difference checkable.
    """
    x, _ = _as_batch(x, params.input_dim, "x")
    eps = np.asarray(eps, dtype=np.float64)
    n = x.shape[0]
    if eps.shape != (n, params.latent_dim):
        raise InvalidInputError(
            f"eps shape {eps.shape} must be ({n}, {params.latent_dim})"
        )
    # forward
    he_pre = x @ params.w_enc + params.b_enc
    he = np.maximum(he_pre, 0.0)
    mu = he @ params.w_mu + params.b_mu
    lv = he @ params.w_lv + params.b_lv
    sig = np.exp(lv / 2.0)
    z = mu + sig * eps
    hd_pre = z @ params.w_dec + params.b_dec
    hd = np.maximum(hd_pre, 0.0)
    r = _sigmoid(hd @ params.w_out + params.b_out)
    rc = np.clip(r, MEAN_CLAMP, 1.0 - MEAN_CLAMP)
    recon_ll = (x * np.log(rc) + (1.0 - x) * np.log(1.0 - rc)).sum(axis=1)
    kl = -0.5 * (1.0 + lv - mu**2 - np.exp(lv)).sum(axis=1)
    loss = float(np.mean(kl - recon_ll))

    # backward (mean over the batch)
    scale = 1.0 / n
    unclamped = (r > MEAN_CLAMP) & (r < 1.0 - MEAN_CLAMP)
    dlogits = np.where(unclamped, r - x, 0.0) * scale
    d_w_out = hd.T @ dlogits
    d_b_out = dlogits.sum(axis=0)
    dhd = dlogits @ params.w_out.T
    dhd_pre = dhd * (hd_pre > 0)
    d_w_dec = z.T @ dhd_pre
    d_b_dec = dhd_pre.sum(axis=0)
    dz = dhd_pre @ params.w_dec.T
    dmu = dz + mu * scale
    dlv = dz * (0.5 * sig * eps) - 0.5 * (1.0 - np.exp(lv)) * scale
    d_w_mu = he.T @ dmu
    d_b_mu = dmu.sum(axis=0)
    d_w_lv = he.T @ dlv
    d_b_lv = dlv.sum(axis=0)
    dhe = dmu @ params.w_mu.T + dlv @ params.w_lv.T
    dhe_pre = dhe * (he_pre > 0)
    d_w_enc = x.T @ dhe_pre
    d_b_enc = dhe_pre.sum(axis=0)
    grads = [
        d_w_enc, d_b_enc, d_w_mu, d_b_mu, d_w_lv,
        d_b_lv, d_w_dec, d_b_dec, d_w_out, d_b_out,
    ]
    return loss, grads


def train_vae(
    images: np.ndarray, config: VaeConfig | None = None
) -> tuple[VaeParams, list[float]]:
    """Train on images scaled to [0, 1]; returns params and the
    per-epoch mean negative-ELBO history."""
    config = config or VaeConfig()
    images = np.asarray(images, dtype=np.float64).reshape(-1, config.input_dim)
    if images.size == 0:
        raise InvalidInputError("empty training set")
    if images.min() < 0.0 or images.max() > 1.0:
        raise InvalidInputError("images must be scaled to [0, 1]")
    n = images.shape[0]
    params = VaeParams.init(config.input_dim, config.hidden, config.latent, config.seed)
    params.config = {
        "hidden": config.hidden,
        "latent": config.latent,
        "learning_rate": config.learning_rate,
        "momentum": config.momentum,
        "batch_size": config.batch_size,
        "epochs": config.epochs,
    }
    rng = np.random.default_rng(config.seed)
    state = OptimizerState.for_params(params.parameters())
    history: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            eps = rng.standard_normal((len(idx), config.latent))
            loss, grads = loss_and_grads(params, images[idx], eps)
            if not math.isfinite(loss):
                raise NumericError(f"non-finite VAE loss {loss}")
            nag_step(params.parameters(), grads, state,
                     config.learning_rate, config.momentum)
            total += loss * len(idx)
        history.append(total / n)
    return params, history


def latent_grid(
    params: VaeParams, grid_size: int = 15, extent: float = 2.0
) -> np.ndarray:
    """Decode a grid over [-extent, extent]^2 into an image mosaic.

    Tiles are deterministic decoder outputs (no sampling): column j
    sweeps the first latent axis, row i the second. Requires a 2-D
    latent space and a square decoder output.
    """
    if params.latent_dim != 2:
        raise UnsupportedConfigError(
            f"latent grid needs a 2-D latent space, got {params.latent_dim}"
        )
    side = math.isqrt(params.input_dim)
    if side * side != params.input_dim:
        raise InvalidInputError(
            f"decoder output size {params.input_dim} is not a square image"
        )
    if grid_size < 1:
        raise InvalidInputError(f"grid_size must be >= 1, got {grid_size}")
    coords = (
        np.linspace(-extent, extent, grid_size) if grid_size > 1 else np.array([0.0])
    )
    mosaic = np.zeros((grid_size * side, grid_size * side))
    for i, z2 in enumerate(coords):
        zs = np.stack([coords, np.full(grid_size, z2)], axis=1)
        tiles = decode(zs, params).reshape(grid_size, side, side)
        for j in range(grid_size):
            mosaic[i * side : (i + 1) * side, j * side : (j + 1) * side] = tiles[j]
    return mosaic


def save_vae(path, params: VaeParams) -> None:
    """Serialize VAE parameters to a GNET file."""
    header = {
        "model": "vae",
        "input_dim": params.input_dim,
        "hidden": params.w_enc.shape[1],
        "latent": params.latent_dim,
        "seed": params.seed,
        "config": params.config,
    }
    write_gnet(path, header, params.parameters())


def load_vae(path) -> VaeParams:
    """Load VAE parameters from a GNET file."""
    header, arrays = read_gnet(path)
    if header.get("model") != "vae":
        raise FormatError(f"expected a vae model, got {header.get('model')!r}")
    return VaeParams.from_arrays(
        arrays, seed=header.get("seed", 0), config=header.get("config", {})
    )
