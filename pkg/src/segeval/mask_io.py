"""Mask file IO: binary PGM (P5) and grayscale PNG.

Write convention: background 0, lesion 255, maxval 255. Read convention:
any stored gray value >= 128 counts as lesion, so PGM round-trips are
bit-exact and externally produced masks with slightly off values still load.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .mask import BinaryMask

LESION_GRAY = 255
LESION_THRESHOLD = 128


def mask_to_gray(mask: BinaryMask) -> np.ndarray:
    return np.where(mask.pixels, np.uint8(LESION_GRAY), np.uint8(0))


def pgm_bytes(gray: np.ndarray) -> bytes:
    """Encode a (height, width) uint8 array as a binary PGM (P5, maxval 255)."""
    height, width = gray.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + gray.astype(np.uint8).tobytes()


def save_pgm(mask: BinaryMask, path) -> None:
    Path(path).write_bytes(pgm_bytes(mask_to_gray(mask)))


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # PGM headers allow '#' comments running to end of line.
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c in b" \t\r\n":
            pos += 1
        elif c == b"#":
            while pos < n and data[pos : pos + 1] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos : pos + 1] not in b" \t\r\n":
        pos += 1
    if start == pos:
        raise ValueError("truncated PGM header")
    return data[start:pos], pos


def load_pgm(path) -> BinaryMask:
    """Read a binary (P5) PGM file as a mask. Values >= 128 become lesion."""
    data = Path(path).read_bytes()
    magic, pos = _next_token(data, 0)
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {magic!r})")
    fields = []
    for _ in range(3):
        tok, pos = _next_token(data, pos)
        fields.append(int(tok))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ValueError(f"{path}: invalid dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    pos += 1  # single whitespace byte separates header from raster
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise ValueError(f"{path}: raster truncated")
    gray = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return BinaryMask(gray >= LESION_THRESHOLD)


def load_png(path) -> BinaryMask:
    """Read a PNG as a mask via its grayscale rendering, same threshold rule."""
    with Image.open(path) as img:
        gray = np.asarray(img.convert("L"))
    return BinaryMask(gray >= LESION_THRESHOLD)


def load_mask(path) -> BinaryMask:
    """Load a mask file, dispatching on extension (.pgm or .png)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        return load_pgm(path)
    if suffix == ".png":
        return load_png(path)
    raise ValueError(f"{path}: unsupported mask format {suffix!r} (expected .pgm or .png)")
