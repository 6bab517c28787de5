"""OSMI raw image format plus PNG previews.

OSMI is the cross-component image contract: magic "OSMI", little-endian
u32 version (1), u32 width, u32 height, then width*height little-endian
32-bit floats, row-major with the top row first.  An 8-bit grayscale PNG
preview can be written alongside for human inspection.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from osmkit.scene import PixelImage

OSMI_MAGIC = b"OSMI"
OSMI_VERSION = 1
DEFAULT_EXTENT = (-2.0, 2.0)


def write_osmi(image: PixelImage, path: str | Path) -> None:
    header = OSMI_MAGIC + struct.pack("<III", OSMI_VERSION, image.width, image.height)
    payload = np.ascontiguousarray(image.values, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_osmi(path: str | Path,
              extent: tuple[float, float] = DEFAULT_EXTENT) -> PixelImage:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != OSMI_MAGIC:
        raise ValueError(f"{path}: not an OSMI file")
    version, width, height = struct.unpack("<III", raw[4:16])
    if version != OSMI_VERSION:
        raise ValueError(f"{path}: unsupported OSMI version {version}")
    expected = 16 + 4 * width * height
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated OSMI payload")
    values = np.frombuffer(raw[16:], dtype="<f4").astype(np.float64)
    return PixelImage(width=width, height=height,
                      values=values.reshape(height, width), extent=extent)


def write_png_preview(image: PixelImage, path: str | Path) -> None:
    """8-bit grayscale preview; values are clipped to [0, 1] first."""
    levels = np.clip(image.values, 0.0, 1.0)
    data = np.round(levels * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(Path(path), format="PNG")
