"""CSV and binary PPM (P6) output for sampling grids.

Colormap: palette index ``i`` in 0..254 is the piecewise-linear "jet" ramp
evaluated at ``t = i / 254``; index 255 is black and is reserved for the
obstacle outline.  Grid values map linearly from ``[min, max]`` onto
0..254 (a constant grid maps to index 0).  Image column ``c`` is the
``c``-th x sample and the top image row is the largest y.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from ..geometry import Curve
from ..imaging import SamplingGrid

OUTLINE_INDEX = 255


def _jet(t: np.ndarray) -> np.ndarray:
    r = np.clip(1.5 - np.abs(4 * t - 3), 0, 1)
    g = np.clip(1.5 - np.abs(4 * t - 2), 0, 1)
    b = np.clip(1.5 - np.abs(4 * t - 1), 0, 1)
    return np.stack([r, g, b], axis=-1)


def palette() -> np.ndarray:
    """The fixed 256 x 3 uint8 palette."""
    pal = np.round(255 * _jet(np.arange(255) / 254.0)).astype(np.uint8)
    return np.vstack([pal, np.zeros((1, 3), dtype=np.uint8)])


PALETTE = palette()


def grid_indices(grid: SamplingGrid, curves: Sequence[Curve] = ()) -> np.ndarray:
    """Palette indices in image layout, shape ``(ny, nx)``."""
    v = grid.values
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        idx = np.floor((v - lo) / (hi - lo) * 254 + 0.5).astype(np.int64)
    else:
        idx = np.zeros(v.shape, dtype=np.int64)
    img = idx.T[::-1].copy()
    if curves:
        xmin, xmax, ymin, ymax = grid.spec.bounds
        nx, ny = grid.spec.nx, grid.spec.ny
        t = 2 * np.pi * np.arange(4 * (nx + ny)) / (4 * (nx + ny))
        for c in curves:
            x, _, _ = c.derivatives(t)
            col = np.round((x[:, 0] - xmin) / (xmax - xmin) * (nx - 1)).astype(int)
            row = ny - 1 - np.round((x[:, 1] - ymin) / (ymax - ymin) * (ny - 1)).astype(int)
            ok = (col >= 0) & (col < nx) & (row >= 0) & (row < ny)
            img[row[ok], col[ok]] = OUTLINE_INDEX
    return img


def write_ppm(grid: SamplingGrid, path, curves: Sequence[Curve] = ()) -> None:
    img = PALETTE[grid_indices(grid, curves)]
    ny, nx = img.shape[:2]
    Path(path).write_bytes(f"P6\n{nx} {ny}\n255\n".encode("ascii") + img.tobytes())


def write_csv(grid: SamplingGrid, path) -> None:
    """``x,y,value`` per sampling point, x index outermost; no header."""
    x, y, v = grid.spec.x, grid.spec.y, grid.values
    x, y, v = x.tolist(), y.tolist(), v.tolist()
    lines = [f"{x[i]!r},{y[j]!r},{v[i][j]!r}" for i in range(len(x)) for j in range(len(y))]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_grid(grid: SamplingGrid, csv_path, image_path, curves: Sequence[Curve] = ()) -> None:
    write_csv(grid, csv_path)
    write_ppm(grid, image_path, curves)
