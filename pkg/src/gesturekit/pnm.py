"""Binary PGM (P5) and PPM (P6) image I/O.

Images are numpy uint8 arrays: (H, W) for grayscale, (H, W, 3) for color,
row-major with origin top-left (x = column, y = row). Files are written
with maxval 255 and exactly one whitespace byte after each header field.
"""

from __future__ import annotations

import numpy as np

from .errors import FormatError, InvalidInputError

_WHITESPACE = b" \t\n\r\x0b\x0c"


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next header token and the offset one byte past it."""
    while pos < len(data):
        if data[pos : pos + 1] in _WHITESPACE:
            pos += 1
        elif data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(data) and data[pos : pos + 1] not in _WHITESPACE:
        pos += 1
    if start == pos:
        raise FormatError("truncated PNM header")
    return data[start:pos], pos


def _parse(data: bytes, magic: bytes, channels: int) -> np.ndarray:
    token, pos = _read_token(data, 0)
    if token != magic:
        raise FormatError(f"expected {magic.decode()} magic, got {token[:8]!r}")
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _read_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise FormatError(f"non-numeric {name} field {token[:8]!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval} (only 255)")
    # Exactly one whitespace byte separates the header from the raster.
    pos += 1
    n = width * height * channels
    raster = data[pos : pos + n]
    if len(raster) != n:
        raise FormatError(f"raster has {len(raster)} bytes, expected {n}")
    img = np.frombuffer(raster, dtype=np.uint8)
    if channels == 1:
        return img.reshape(height, width).copy()
    return img.reshape(height, width, channels).copy()


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM (P5) file into an (H, W) uint8 array."""
    with open(path, "rb") as f:
        return _parse(f.read(), b"P5", 1)


def read_ppm(path) -> np.ndarray:
    """Read a binary PPM (P6) file into an (H, W, 3) uint8 array."""
    with open(path, "rb") as f:
        return _parse(f.read(), b"P6", 3)


def write_pgm(path, img: np.ndarray) -> None:
    """Write an (H, W) uint8 array as binary PGM (P5), maxval 255."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidInputError(f"PGM needs a 2-D array, got shape {img.shape}")
    data = np.ascontiguousarray(img, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (data.shape[1], data.shape[0]))
        f.write(data.tobytes())


def write_ppm(path, img: np.ndarray) -> None:
    """Write an (H, W, 3) uint8 array as binary PPM (P6), maxval 255."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InvalidInputError(f"PPM needs an (H, W, 3) array, got shape {img.shape}")
    data = np.ascontiguousarray(img, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (data.shape[1], data.shape[0]))
        f.write(data.tobytes())
