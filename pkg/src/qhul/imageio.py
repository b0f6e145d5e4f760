"""Portable graymap (P5) and portable float map (Pf) reading and writing."""

from __future__ import annotations

import os

import numpy as np

__all__ = ["read_pgm", "write_pgm", "read_pfm", "write_pfm"]


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` whitespace-separated header tokens and the raster offset."""
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ValueError("truncated image header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def read_pgm(path: str | os.PathLike) -> tuple[np.ndarray, int]:
    """Read a binary graymap; returns ``(pixels, maxval)`` with rows top to bottom."""
    with open(path, "rb") as f:
        data = f.read()
    tokens, offset = _header_tokens(data, 4)
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed PGM header") from exc
    if width < 0 or height < 0 or not (0 < maxval < 65536):
        raise ValueError(f"{path}: invalid PGM dimensions or maxval")
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    expected = width * height * dtype.itemsize
    raster = data[offset:offset + expected]
    if len(raster) != expected:
        raise ValueError(f"{path}: PGM raster truncated ({len(raster)} of {expected} bytes)")
    img = np.frombuffer(raster, dtype=dtype).reshape(height, width).astype(np.int64)
    if np.any(img > maxval):
        raise ValueError(f"{path}: pixel values exceed maxval {maxval}")
    return img, maxval


def write_pgm(path: str | os.PathLike, pixels: np.ndarray, maxval: int = 255) -> None:
    """Write integer pixels as an 8-bit (maxval < 256) or 16-bit binary graymap."""
    img = np.asarray(pixels)
    if img.ndim != 2:
        raise ValueError("PGM image must be 2-D")
    if not (0 < maxval < 65536):
        raise ValueError("maxval must lie in 1..65535")
    if np.any(img < 0) or np.any(img > maxval):
        raise ValueError(f"pixel values must lie in 0..{maxval}")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    height, width = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        f.write(img.astype(dtype).tobytes())


def read_pfm(path: str | os.PathLike) -> np.ndarray:
    """Read a grayscale float map; returns float32 rows top to bottom."""
    with open(path, "rb") as f:
        data = f.read()
    tokens, offset = _header_tokens(data, 4)
    if tokens[0] != b"Pf":
        raise ValueError(f"{path}: not a grayscale PFM (magic {tokens[0]!r})")
    try:
        width, height = int(tokens[1]), int(tokens[2])
        scale = float(tokens[3])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed PFM header") from exc
    if scale == 0.0:
        raise ValueError(f"{path}: PFM scale must be non-zero")
    dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
    expected = width * height * 4
    raster = data[offset:offset + expected]
    if len(raster) != expected:
        raise ValueError(f"{path}: PFM raster truncated ({len(raster)} of {expected} bytes)")
    img = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    # PFM stores the bottom row first
    return img[::-1].astype(np.float32)


def write_pfm(path: str | os.PathLike, image: np.ndarray) -> None:
    """Write a 2-D array as little-endian 32-bit PFM (scale -1.0)."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("PFM image must be 2-D")
    height, width = img.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{width} {height}\n-1.0\n".encode("ascii"))
        f.write(np.ascontiguousarray(img[::-1], dtype="<f4").tobytes())
