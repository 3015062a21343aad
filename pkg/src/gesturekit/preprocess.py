"""Gesture-volume preprocessing for the classifier.

Turns a raw frame sequence into a fixed (32, 28, 28, 3) volume:
temporal resample, spatial downsample, Sobel gradient channel, temporal
difference channel, then per-channel zero-mean/unit-variance
normalization over the whole volume.
"""

from __future__ import annotations

import os
import re

import numpy as np

from .errors import InvalidInputError
from .pnm import read_pgm

TARGET_FRAMES = 32
TARGET_SIZE = 28


def resample_indices(n_frames: int, target: int = TARGET_FRAMES) -> list[int]:
    """Nearest-neighbor frame indices, endpoints pinned, round half up.

    Output index k maps to input frame round(k * (n-1) / (target-1)).
    """
    if n_frames < 1:
        raise InvalidInputError("sequence is empty")
    if target < 1:
        raise InvalidInputError(f"target length must be >= 1, got {target}")
    if target == 1:
        return [0]
    # floor(k*(n-1)/(t-1) + 1/2) in exact integer arithmetic
    return [
        (2 * k * (n_frames - 1) + (target - 1)) // (2 * (target - 1))
        for k in range(target)
    ]


def resample_temporal(frames, target: int = TARGET_FRAMES) -> list[np.ndarray]:
    """Resample a frame sequence to a fixed length by nearest neighbor."""
    frames = list(frames)
    idx = resample_indices(len(frames), target)
    return [frames[i] for i in idx]


def downsample_spatial(img: np.ndarray, factor: int = 2) -> np.ndarray:
    """Block-mean downsample by an integer factor, rounding half up."""
    img = np.asarray(img)
    if img.ndim not in (2, 3):
        raise InvalidInputError(f"expected 2-D or 3-D image, got shape {img.shape}")
    h, w = img.shape[:2]
    if h % factor or w % factor:
        raise InvalidInputError(
            f"dimensions {w}x{h} not divisible by factor {factor}"
        )
    blocks = img.astype(np.uint64).reshape(
        (h // factor, factor, w // factor, factor) + img.shape[2:]
    )
    sums = blocks.sum(axis=(1, 3))
    n = factor * factor
    # round-half-up of sums/n: floor((2*sums + n) / (2*n))
    return ((2 * sums + n) // (2 * n)).astype(np.uint8)


def upsample_nearest(img: np.ndarray, factor: int = 2) -> np.ndarray:
    """Nearest-neighbor upsample by an integer factor."""
    img = np.asarray(img)
    out = np.repeat(np.repeat(img, factor, axis=0), factor, axis=1)
    return out


def sobel_magnitude(img: np.ndarray) -> np.ndarray:
    """Gradient magnitude from the 3x3 Sobel kernels.

    Borders use edge-replication padding; output is float64 and
    non-negative.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidInputError(f"image must be single-channel, got shape {img.shape}")
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise InvalidInputError(f"image {img.shape} smaller than 3x3 kernel")
    p = np.pad(img.astype(np.float64), 1, mode="edge")
    gx = (
        (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:])
    )
    return np.hypot(gx, gy)


def normalize_channel(values: np.ndarray) -> np.ndarray:
    """Zero-mean, unit-variance (population) normalization.

    Constant input (std below 1e-12) maps to all zeros.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise InvalidInputError("cannot normalize an empty slice")
    mean = values.mean()
    std = values.std()
    if std < 1e-12:
        return np.zeros_like(values)
    return (values - mean) / std


def build_volume(frames, target: int = TARGET_FRAMES) -> np.ndarray:
    """Build the (32, 28, 28, 3) normalized classifier input volume.

    Channels are (intensity, Sobel gradient magnitude, absolute
    difference from the previous frame), each normalized over the whole
    volume. Frames must be grayscale, 56x56 (downsampled here) or
    28x28.
    """
    frames = [np.asarray(f) for f in resample_temporal(frames, target)]
    planes = []
    for f in frames:
        if f.ndim != 2:
            raise InvalidInputError(f"frames must be grayscale, got shape {f.shape}")
        if f.shape == (2 * TARGET_SIZE, 2 * TARGET_SIZE):
            f = downsample_spatial(f, 2)
        if f.shape != (TARGET_SIZE, TARGET_SIZE):
            raise InvalidInputError(
                f"frames must be {2 * TARGET_SIZE}x{2 * TARGET_SIZE} or "
                f"{TARGET_SIZE}x{TARGET_SIZE}, got {f.shape[1]}x{f.shape[0]}"
            )
        planes.append(f.astype(np.float64))
    intensity = np.stack(planes)
    gradient = np.stack([sobel_magnitude(p) for p in planes])
    diff = np.zeros_like(intensity)
    diff[1:] = np.abs(intensity[1:] - intensity[:-1])
    volume = np.stack([intensity, gradient, diff], axis=-1)
    for c in range(volume.shape[-1]):
        volume[..., c] = normalize_channel(volume[..., c])
    return volume


_FRAME_RE = re.compile(r"^frame_(\d+)\.pgm$")


def load_gesture_dir(path) -> list[np.ndarray]:
    """Load PGM frames named frame_NNNN.pgm from a directory, ascending."""
    if not os.path.isdir(path):
        raise InvalidInputError(f"not a directory: {path}")
    numbered = []
    for name in os.listdir(path):
        m = _FRAME_RE.match(name)
        if m:
            numbered.append((int(m.group(1)), name))
    if not numbered:
        raise InvalidInputError(f"no frame_NNNN.pgm files in {path}")
    return [read_pgm(os.path.join(path, name)) for _, name in sorted(numbered)]
