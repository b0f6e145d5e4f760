"""Built-in binary phase objects and scene files on disk.

Scene files come in pairs, one image for ``|R|`` and one for the phase.
Graymaps map ``0..maxval`` linearly onto ``[0, 1]`` for the magnitude and
onto ``(-pi, pi]`` for the phase (``v -> 2 pi v / maxval - pi``, with -pi
folded onto pi). Float maps carry the values directly.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np

from qhul.imageio import read_pfm, read_pgm, write_pfm, write_pgm
from qhul.model import SceneObject

__all__ = ["GLYPHS", "glyph_scene", "load_scene", "save_scene", "render_text"]

_FONT = {
    "I": ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"],
    "O": [".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."],
    "F": ["#####", "#....", "#....", "####.", "#....", "#....", "#...."],
    "Q": [".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"],
    "H": ["#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"],
    "U": ["#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."],
    "L": ["#....", "#....", "#....", "#....", "#....", "#....", "#####"],
    " ": [".....", ".....", ".....", ".....", ".....", ".....", "....."],
}

GLYPHS = ("iof", "bars", "disk", "blank", "text:<letters>")

PHASE_FLOAT_SLACK = 1e-6


def _margin(width: int, height: int) -> int:
    return max(1, min(width, height) // 16)


def render_text(text: str, width: int, height: int) -> np.ndarray:
    """Boolean mask with ``text`` drawn in a 5x7 block font, centred and scaled up."""
    text = text.upper()
    missing = sorted(set(text) - set(_FONT))
    if missing:
        raise ValueError(f"no glyph for characters {missing}; available: {''.join(sorted(_FONT))}")
    if not text:
        return np.zeros((height, width), dtype=bool)
    cols = []
    for k, ch in enumerate(text):
        if k:
            cols.append(np.zeros((7, 1), dtype=bool))
        cols.append(np.array([[c == "#" for c in row] for row in _FONT[ch]]))
    bitmap = np.hstack(cols)
    m = _margin(width, height)
    scale = min((width - 2 * m) // bitmap.shape[1], (height - 2 * m) // bitmap.shape[0])
    if scale < 1:
        raise ValueError(f"{width}x{height} is too small to render {text!r}")
    big = np.kron(bitmap, np.ones((scale, scale), dtype=bool))
    out = np.zeros((height, width), dtype=bool)
    top = (height - big.shape[0]) // 2
    left = (width - big.shape[1]) // 2
    out[top:top + big.shape[0], left:left + big.shape[1]] = big
    return out


def glyph_scene(name: str, width: int = 64, height: int = 64) -> SceneObject:
    """Binary 0/pi phase object with ``|R| = 1`` inside a border-free support.

    ``iof`` draws the letters I, O, F; ``bars`` draws eight vertical bars;
    ``disk`` a centred disk; ``blank`` is a zero-reflectance scene with empty
    support; ``text:ABC`` draws arbitrary letters from the built-in font.
    """
    if width < 1 or height < 1:
        raise ValueError("glyph scenes need positive dimensions")
    key = name.lower()
    if key == "blank":
        return SceneObject(np.zeros((height, width)), np.zeros((height, width)), name=name)
    m = _margin(width, height)
    support = np.zeros((height, width), dtype=bool)
    support[m:height - m, m:width - m] = True
    if key == "iof":
        mark = render_text("IOF", width, height)
    elif key.startswith("text:"):
        mark = render_text(name[5:], width, height)
    elif key == "bars":
        period = max(2, width // 8)
        mark = np.broadcast_to((np.arange(width) // (period // 2)) % 2 == 1, (height, width)).copy()
    elif key == "disk":
        yy, xx = np.mgrid[0:height, 0:width]
        r = min(width, height) / 4.0
        mark = (yy - (height - 1) / 2.0) ** 2 + (xx - (width - 1) / 2.0) ** 2 <= r * r
    else:
        raise ValueError(f"unknown glyph {name!r}; available: {', '.join(GLYPHS)}")
    mark &= support
    magnitude = support.astype(np.float64)
    phase = np.where(mark, math.pi, 0.0)
    return SceneObject(magnitude, phase, support, name=name)


def _is_pfm(path: Path) -> bool:
    with open(path, "rb") as f:
        return f.read(2) == b"Pf"


def _read_magnitude(path: Path) -> np.ndarray:
    if _is_pfm(path):
        return read_pfm(path).astype(np.float64)
    img, maxval = read_pgm(path)
    return img / maxval


def _read_phase(path: Path) -> np.ndarray:
    if _is_pfm(path):
        ph = read_pfm(path).astype(np.float64)
        # float32(pi) rounds above pi
        ph = np.where((ph > math.pi) & (ph <= math.pi + PHASE_FLOAT_SLACK), math.pi, ph)
        return ph
    img, maxval = read_pgm(path)
    ph = 2.0 * math.pi * img / maxval - math.pi
    return np.where(ph <= -math.pi, math.pi, ph)


def load_scene(source: str | tuple[str | os.PathLike, str | os.PathLike],
               width: int = 64, height: int = 64) -> SceneObject:
    """Scene from a glyph name or a ``(magnitude_path, phase_path)`` pair."""
    if isinstance(source, str):
        return glyph_scene(source, width, height)
    mag_path, phase_path = (Path(p) for p in source)
    for p in (mag_path, phase_path):
        if not p.is_file():
            raise FileNotFoundError(f"scene file not found: {p}")
    magnitude = _read_magnitude(mag_path)
    phase = _read_phase(phase_path)
    if magnitude.shape != phase.shape:
        raise ValueError(f"magnitude {magnitude.shape} and phase {phase.shape} images differ in size")
    return SceneObject(magnitude, phase, name=mag_path.stem)


def save_scene(scene: SceneObject, magnitude_path: str | os.PathLike,
               phase_path: str | os.PathLike) -> None:
    """Write a scene pair; ``.pgm`` paths are quantized to 16 bits, others written as PFM."""
    for path, grid, is_phase in ((magnitude_path, scene.magnitude, False),
                                 (phase_path, scene.phase, True)):
        if str(path).lower().endswith(".pgm"):
            maxval = 65535
            unit = (grid + math.pi) / (2.0 * math.pi) if is_phase else grid
            write_pgm(path, np.rint(unit * maxval).astype(np.int64), maxval)
        else:
            write_pfm(path, grid)
