"""FMAP container: one named float map per file.

Layout: magic ``FMAP``, u32 version (1), u32 header length, UTF-8 JSON
header ``{"width":..,"height":..,"name":..,"dtype":"f32le"}``, then
width*height little-endian 32-bit floats in row-major order. The header is
serialized canonically (sorted keys, no whitespace) so write(read(f)) is
byte-identical.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .imaging import FloatMap

__all__ = ["FmapError", "read_fmap", "write_fmap"]

_MAGIC = b"FMAP"
_VERSION = 1


class FmapError(ValueError):
    """Malformed or unsupported FMAP content."""


def write_fmap(path, name: str, fmap: FloatMap) -> None:
    header = json.dumps(
        {
            "width": fmap.width,
            "height": fmap.height,
            "name": name,
            "dtype": "f32le",
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    payload = fmap.values.astype("<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(header)))
        fh.write(header)
        fh.write(payload)


def read_fmap(path):
    """Read an FMAP file; returns (name, FloatMap)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != _MAGIC:
        raise FmapError(f"{path}: not an FMAP file")
    version, hlen = struct.unpack_from("<II", data, 4)
    if version != _VERSION:
        raise FmapError(f"{path}: unsupported version {version}")
    if len(data) < 12 + hlen:
        raise FmapError(f"{path}: truncated header")
    try:
        header = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise FmapError(f"{path}: bad header") from None
    try:
        width = int(header["width"])
        height = int(header["height"])
        name = str(header["name"])
        dtype = header["dtype"]
    except (KeyError, TypeError, ValueError):
        raise FmapError(f"{path}: incomplete header") from None
    if dtype != "f32le":
        raise FmapError(f"{path}: unsupported dtype {dtype!r}")
    if width < 1 or height < 1:
        raise FmapError(f"{path}: bad dimensions {width}x{height}")
    payload = data[12 + hlen :]
    if len(payload) != 4 * width * height:
        raise FmapError(f"{path}: payload length mismatch")
    values = np.frombuffer(payload, dtype="<f4").reshape(height, width)
    if not np.all(np.isfinite(values)):
        raise FmapError(f"{path}: non-finite values")
    return name, FloatMap(values.astype(np.float64))
