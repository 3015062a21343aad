"""Digit dataset ingestion: IDX files and a seeded synthetic generator."""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError, InvalidInputError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
IMAGE_SIZE = 28
NUM_CLASSES = 10


def _read_be32(data: bytes, pos: int, field: str) -> int:
    if len(data) < pos + 4:
        raise FormatError(f"truncated file: missing {field}")
    return struct.unpack(">I", data[pos : pos + 4])[0]


def load_idx_images(path) -> np.ndarray:
    """Read an IDX image file into an (N, 28, 28) uint8 array."""
    with open(path, "rb") as f:
        data = f.read()
    magic = _read_be32(data, 0, "images magic")
    if magic != IDX_IMAGES_MAGIC:
        raise FormatError(f"images magic is 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}")
    count = _read_be32(data, 4, "image count")
    rows = _read_be32(data, 8, "row count")
    cols = _read_be32(data, 12, "column count")
    if rows != IMAGE_SIZE or cols != IMAGE_SIZE:
        raise FormatError(f"image dimensions are {rows}x{cols}, expected {IMAGE_SIZE}x{IMAGE_SIZE}")
    raster = data[16:]
    if len(raster) != count * rows * cols:
        raise FormatError(
            f"image raster has {len(raster)} bytes, expected {count * rows * cols}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(count, rows, cols).copy()


def load_idx_labels(path) -> np.ndarray:
    """Read an IDX label file into an (N,) uint8 array of classes 0-9."""
    with open(path, "rb") as f:
        data = f.read()
    magic = _read_be32(data, 0, "labels magic")
    if magic != IDX_LABELS_MAGIC:
        raise FormatError(f"labels magic is 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}")
    count = _read_be32(data, 4, "label count")
    raw = data[8:]
    if len(raw) != count:
        raise FormatError(f"label data has {len(raw)} bytes, expected {count}")
    labels = np.frombuffer(raw, dtype=np.uint8).copy()
    if labels.size and labels.max() >= NUM_CLASSES:
        raise FormatError(f"label value {labels.max()} out of range 0-{NUM_CLASSES - 1}")
    return labels


def load_idx(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Load a paired IDX dataset; image and label counts must agree."""
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise FormatError(
            f"count mismatch: {images.shape[0]} images but {labels.shape[0]} labels"
        )
    return images, labels


def write_idx_images(path, images: np.ndarray) -> None:
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim != 3 or images.shape[1:] != (IMAGE_SIZE, IMAGE_SIZE):
        raise InvalidInputError(f"expected (N, 28, 28) images, got shape {images.shape}")
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, images.shape[0], IMAGE_SIZE, IMAGE_SIZE))
        f.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise InvalidInputError(f"expected an (N,) label vector, got shape {labels.shape}")
    if labels.size and labels.max() >= NUM_CLASSES:
        raise InvalidInputError(f"label value {labels.max()} out of range 0-{NUM_CLASSES - 1}")
    with open(path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())


# 5x7 pixel-font glyphs for the synthetic digit generator.
_GLYPHS = [
    ("01110 10001 10011 10101 11001 10001 01110"),  # 0
    ("00100 01100 00100 00100 00100 00100 01110"),  # 1
    ("01110 10001 00001 00010 00100 01000 11111"),  # 2
    ("11111 00010 00100 00010 00001 10001 01110"),  # 3
    ("00010 00110 01010 10010 11111 00010 00010"),  # 4
    ("11111 10000 11110 00001 00001 10001 01110"),  # 5
    ("00110 01000 10000 11110 10001 10001 01110"),  # 6
    ("11111 00001 00010 00100 01000 01000 01000"),  # 7
    ("01110 10001 10001 01110 10001 10001 01110"),  # 8
    ("01110 10001 10001 01111 00001 00010 01100"),  # 9
]


def _glyph_array(digit: int) -> np.ndarray:
    rows = _GLYPHS[digit].split()
    return np.array([[int(ch) for ch in row] for row in rows], dtype=np.uint8)


def synth_digits(n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Seeded synthetic digit images: jittered pixel-font glyphs.

    Each 28x28 sample renders a 5x7 glyph scaled 3x, with a random
    +-2 px shift, random stroke intensity, and mild Gaussian noise.
    """
    if n < 1:
        raise InvalidInputError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    glyphs = [np.kron(_glyph_array(d), np.ones((3, 3), dtype=np.uint8)) for d in range(10)]
    gh, gw = glyphs[0].shape  # 21 x 15
    images = np.zeros((n, IMAGE_SIZE, IMAGE_SIZE), dtype=np.uint8)
    labels = rng.integers(0, NUM_CLASSES, size=n).astype(np.uint8)
    base_y = (IMAGE_SIZE - gh) // 2
    base_x = (IMAGE_SIZE - gw) // 2
    for i in range(n):
        canvas = np.zeros((IMAGE_SIZE, IMAGE_SIZE), dtype=np.float64)
        dy, dx = rng.integers(-2, 3, size=2)
        intensity = rng.uniform(160.0, 255.0)
        y0, x0 = base_y + dy, base_x + dx
        canvas[y0 : y0 + gh, x0 : x0 + gw] = glyphs[labels[i]] * intensity
        canvas += rng.normal(0.0, 10.0, canvas.shape)
        images[i] = np.clip(canvas, 0.0, 255.0).astype(np.uint8)
    return images, labels
