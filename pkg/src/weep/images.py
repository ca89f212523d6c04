"""Grayscale image I/O.

Binary PGM (P5, 8-bit) is the portable baseline format: read and written
exactly, no external dependencies.  PNG is supported opportunistically when
Pillow is importable.  Pixels are handled as float64 in [0, 255].
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

__all__ = ["read_pgm", "write_pgm", "read_image", "write_image"]

_PGM_HEADER = re.compile(
    rb"^P5\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s"
)


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) 8-bit PGM file into a float64 array."""
    data = Path(path).read_bytes()
    m = _PGM_HEADER.match(data)
    if m is None:
        raise ValueError(f"{path}: not a binary P5 PGM file")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM supported (maxval 255), got {maxval}")
    raster = data[m.end():]
    if len(raster) < width * height:
        raise ValueError(f"{path}: truncated raster ({len(raster)} < {width * height} bytes)")
    img = np.frombuffer(raster[: width * height], dtype=np.uint8)
    return img.reshape(height, width).astype(float)


def write_pgm(path, img) -> None:
    """Write an array as binary 8-bit PGM, clipping and rounding to [0, 255]."""
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    pixels = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())


def read_image(path) -> np.ndarray:
    """Read a grayscale image (PGM always; PNG when Pillow is available)."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    if path.suffix.lower() == ".png":
        try:
            from PIL import Image as PILImage
        except ImportError as exc:
            raise OSError(
                f"{path}: PNG support requires Pillow; convert to PGM instead"
            ) from exc
        with PILImage.open(path) as im:
            return np.asarray(im.convert("L"), dtype=float)
    raise ValueError(f"{path}: unsupported image format {path.suffix!r} (use .pgm or .png)")


def write_image(path, img) -> None:
    """Write a grayscale image by extension (PGM always; PNG via Pillow)."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        write_pgm(path, img)
        return
    if path.suffix.lower() == ".png":
        try:
            from PIL import Image as PILImage
        except ImportError as exc:
            raise OSError(
                f"{path}: PNG support requires Pillow; write PGM instead"
            ) from exc
        arr = np.clip(np.rint(np.asarray(img, dtype=float)), 0, 255).astype(np.uint8)
        PILImage.fromarray(arr, mode="L").save(path)
        return
    raise ValueError(f"{path}: unsupported image format {path.suffix!r} (use .pgm or .png)")
