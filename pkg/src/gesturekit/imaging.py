"""Pixel-level segmentation primitives.

Convention used everywhere in this package: x is the column index,
y is the row index, origin top-left. Grayscale images are (H, W) uint8
arrays, color images (H, W, 3) uint8, binary masks (H, W) uint8 with
values in {0, max_value} where 255 marks foreground.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyRegionError, InvalidInputError


def _require_gray(img: np.ndarray, name: str = "image") -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidInputError(f"{name} must be single-channel, got shape {img.shape}")
    return img


def _require_color(img: np.ndarray, name: str = "image") -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InvalidInputError(f"{name} must be 3-channel, got shape {img.shape}")
    return img


def grayscale(src: np.ndarray) -> np.ndarray:
    """Convert a 3-channel image to grayscale.

    Each output pixel is the unweighted channel mean (R+G+B)/3 rounded
    half up, so results are reproducible in integer arithmetic.
    """
    src = _require_color(src, "src")
    s = src.astype(np.uint32).sum(axis=2)
    # round-half-up of s/3 without float rounding: floor((2s + 3) / 6)
    return ((2 * s + 3) // 6).astype(np.uint8)


def threshold_binary(src: np.ndarray, threshold: int, max_value: int = 255) -> np.ndarray:
    """Binary threshold: max_value where src(x, y) > threshold (strict), else 0."""
    src = _require_gray(src, "src")
    return np.where(src > threshold, np.uint8(max_value), np.uint8(0))


def color_distance_mask(
    frame: np.ndarray, key_color: tuple[int, int, int], threshold: int
) -> np.ndarray:
    """Foreground mask by distance from a key color.

    Per-pixel per-channel absolute difference from key_color, reduced to
    grayscale, then binarized: 255 = foreground (far from the key color),
    0 = background.
    """
    frame = _require_color(frame, "frame")
    key = np.asarray(key_color, dtype=np.int32).reshape(1, 1, 3)
    diff = np.abs(frame.astype(np.int32) - key).astype(np.uint8)
    return threshold_binary(grayscale(diff), threshold, 255)


def replace_background(
    frame: np.ndarray, new_bg: np.ndarray, mask: np.ndarray
) -> np.ndarray:
    """Keep frame pixels where the mask is set, substitute new_bg elsewhere."""
    frame = _require_color(frame, "frame")
    new_bg = _require_color(new_bg, "new_bg")
    mask = _require_gray(mask, "mask")
    if frame.shape[:2] != new_bg.shape[:2] or frame.shape[:2] != mask.shape:
        raise InvalidInputError(
            f"dimension mismatch: frame {frame.shape[:2]}, "
            f"background {new_bg.shape[:2]}, mask {mask.shape}"
        )
    return np.where(mask[:, :, None] != 0, frame, new_bg)


def frame_difference(
    frame_t: np.ndarray, frame_prev: np.ndarray, threshold: int
) -> np.ndarray:
    """Motion mask: 255 where |frame_t - frame_prev| exceeds the threshold."""
    frame_t = _require_gray(frame_t, "frame_t")
    frame_prev = _require_gray(frame_prev, "frame_prev")
    if frame_t.shape != frame_prev.shape:
        raise InvalidInputError(
            f"dimension mismatch: {frame_t.shape} vs {frame_prev.shape}"
        )
    diff = np.abs(frame_t.astype(np.int32) - frame_prev.astype(np.int32))
    return threshold_binary(diff.astype(np.uint8), threshold, 255)


def _cross(o: tuple[int, int], a: tuple[int, int], b: tuple[int, int]) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(mask: np.ndarray) -> list[tuple[int, int]]:
    """Convex hull of all nonzero mask pixels, via the monotone chain.

    Returns (x, y) vertices in counter-clockwise order (in image
    coordinates), starting from the lexicographically smallest point.
    Collinear interior points are excluded.
    """
    mask = _require_gray(mask, "mask")
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        raise EmptyRegionError("mask has no nonzero pixels")
    points = sorted({(int(x), int(y)) for x, y in zip(xs, ys)})
    if len(points) == 1:
        return points
    lower: list[tuple[int, int]] = []
    for p in points:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[int, int]] = []
    for p in reversed(points):
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]
