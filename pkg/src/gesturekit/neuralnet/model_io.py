"""GNET model file format.

Layout: magic bytes ``GNET``, a version byte (1), a 4-byte little-endian
header length, a UTF-8 JSON header, then every parameter tensor as
little-endian IEEE-754 32-bit floats in spec order. The header's
``model`` field distinguishes classifier and VAE payloads.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from ..errors import FormatError
from .network import LayerSpec, Network, fingerprint

MAGIC = b"GNET"
VERSION = 1


def write_gnet(path, header: dict, arrays: list[np.ndarray]) -> None:
    """Low-level writer; header keys are serialized canonically."""
    header = dict(header)
    header["param_shapes"] = [list(np.asarray(a).shape) for a in arrays]
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(bytes([VERSION]))
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for a in arrays:
            f.write(np.ascontiguousarray(a, dtype="<f4").tobytes())


def read_gnet(path) -> tuple[dict, list[np.ndarray]]:
    """Low-level reader; returns (header, float64 parameter tensors)."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < 9:
        raise FormatError("truncated model file")
    if data[4] != VERSION:
        raise FormatError(f"unsupported version {data[4]}, expected {VERSION}")
    (header_len,) = struct.unpack("<I", data[5:9])
    blob = data[9 : 9 + header_len]
    if len(blob) != header_len:
        raise FormatError("truncated model header")
    try:
        header = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"unparseable model header: {e}") from None
    shapes = header.get("param_shapes")
    if shapes is None:
        raise FormatError("model header missing param_shapes")
    pos = 9 + header_len
    arrays = []
    for shape in shapes:
        n = int(np.prod(shape)) if shape else 1
        raw = data[pos : pos + 4 * n]
        if len(raw) != 4 * n:
            raise FormatError(f"truncated parameter tensor of shape {shape}")
        arrays.append(np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape))
        pos += 4 * n
    if pos != len(data):
        raise FormatError(f"{len(data) - pos} trailing bytes after parameters")
    return header, arrays


def save_network(path, net: Network) -> None:
    """Serialize a classifier network to a GNET file."""
    header = {
        "model": "classifier",
        "input_shape": list(net.input_shape),
        "specs": [s.to_dict() for s in net.specs],
        "seed": net.seed,
        "config": net.config,
        "fingerprint": net.fingerprint,
    }
    write_gnet(path, header, net.parameters())


def load_network(path) -> Network:
    """Load a classifier network from a GNET file."""
    header, arrays = read_gnet(path)
    if header.get("model") != "classifier":
        raise FormatError(f"expected a classifier model, got {header.get('model')!r}")
    try:
        specs = [LayerSpec.from_dict(d) for d in header["specs"]]
        input_shape = tuple(header["input_shape"])
    except (KeyError, TypeError) as e:
        raise FormatError(f"model header missing field: {e}") from None
    if header.get("fingerprint") != fingerprint(specs, input_shape):
        raise FormatError("architecture fingerprint does not match layer specs")
    return Network(
        specs,
        input_shape,
        seed=header.get("seed", 0),
        params=arrays,
        config=header.get("config", {}),
    )
