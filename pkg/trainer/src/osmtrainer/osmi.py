"""Reader/writer for the OSMI raw image contract.

Layout: magic "OSMI", little-endian u32 version (1), u32 width, u32 height,
then width*height little-endian f32 values, row-major, top row first.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

MAGIC = b"OSMI"
VERSION = 1


def read_osmi(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise ValueError(f"{path}: not an OSMI file")
    version, width, height = struct.unpack("<III", raw[4:16])
    if version != VERSION:
        raise ValueError(f"{path}: unsupported OSMI version {version}")
    if len(raw) != 16 + 4 * width * height:
        raise ValueError(f"{path}: truncated OSMI payload")
    return np.frombuffer(raw[16:], dtype="<f4").reshape(height, width).copy()


def write_osmi(values: np.ndarray, path: str | Path) -> None:
    values = np.asarray(values, dtype="<f4")
    if values.ndim != 2:
        raise ValueError("OSMI images are 2D")
    height, width = values.shape
    header = MAGIC + struct.pack("<III", VERSION, width, height)
    Path(path).write_bytes(header + np.ascontiguousarray(values).tobytes())


def write_mask_png(mask: np.ndarray, path: str | Path) -> None:
    """Binary mask as an 8-bit black/white PNG."""
    data = (np.asarray(mask) > 0).astype(np.uint8) * 255
    Image.fromarray(data, mode="L").save(Path(path), format="PNG")
