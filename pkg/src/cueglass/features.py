"""Face-window registration and gradient-histogram features.

registration() crops a face rectangle (plus optional margin) and resamples
it to the fixed feature window with corner-aligned bilinear interpolation.
hog() computes unsigned-orientation gradient histograms: per-cell 9-bin
histograms with bilinear orientation interpolation, 2x2-cell blocks at
stride 1, L2-hys block normalization.  64x64 window, 8x8 cells -> 1764
features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imageops import bilinear_resize


_HYS_EPS = 1e-12


class GeometryMismatch(Exception):
    pass


class DegenerateRectangle(Exception):
    pass


@dataclass(frozen=True)
class HogParams:
    window: int = 64
    cell: int = 8
    block: int = 2          # cells per block side
    bins: int = 9
    clip: float = 0.2

    def validate(self) -> None:
        if self.window % self.cell != 0:
            raise GeometryMismatch(f"window {self.window} % cell {self.cell}")
        if self.cells_per_side < self.block:
            raise GeometryMismatch("block larger than cell grid")
        if self.bins < 2:
            raise GeometryMismatch(f"bins {self.bins}")

    @property
    def cells_per_side(self) -> int:
        return self.window // self.cell

    @property
    def blocks_per_side(self) -> int:
        return self.cells_per_side - self.block + 1

    @property
    def dim(self) -> int:
        return self.blocks_per_side ** 2 * self.block ** 2 * self.bins


def registration(image: np.ndarray, rect: tuple[int, int, int, int],
                 margin: float = 0.0, window: int = 64) -> np.ndarray:
    """Extract rect (expanded by margin * size each side, clipped to the
    image) and resample to window x window."""
    x, y, w, h = rect
    if w <= 0 or h <= 0:
        raise DegenerateRectangle(str(rect))
    ih, iw = image.shape
    mx = int(round(w * margin))
    my = int(round(h * margin))
    x0 = max(0, x - mx)
    y0 = max(0, y - my)
    x1 = min(iw, x + w + mx)
    y1 = min(ih, y + h + my)
    if x1 <= x0 or y1 <= y0:
        raise DegenerateRectangle(f"{rect} outside {image.shape}")
    return bilinear_resize(image[y0:y1, x0:x1], window, window)


def _gradients(window: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # central differences inside, one-sided at the borders (np.gradient rule)
    gy, gx = np.gradient(window.astype(np.float64))
    return gx, gy


def hog(window: np.ndarray, params: HogParams | None = None) -> np.ndarray:
    params = params or HogParams()
    params.validate()
    if window.shape != (params.window, params.window):
        raise GeometryMismatch(f"{window.shape} != {params.window} window")

    gx, gy = _gradients(window)
    mag = np.hypot(gx, gy)
    theta = np.arctan2(gy, gx) % np.pi          # unsigned orientation
    bin_width = np.pi / params.bins

    # bilinear split between the two nearest bin centers, circular over pi
    pos = theta / bin_width - 0.5
    lo = np.floor(pos).astype(int)
    frac = pos - lo
    lo_idx = lo % params.bins
    hi_idx = (lo + 1) % params.bins

    n = params.cells_per_side
    ci = np.arange(params.window) // params.cell
    cell_i = np.repeat(ci, params.window).reshape(params.window, params.window)
    cell_j = cell_i.T
    hist = np.zeros((n, n, params.bins))
    np.add.at(hist, (cell_i.ravel(), cell_j.ravel(), lo_idx.ravel()),
              (mag * (1.0 - frac)).ravel())
    np.add.at(hist, (cell_i.ravel(), cell_j.ravel(), hi_idx.ravel()),
              (mag * frac).ravel())

    out = []
    b = params.block
    for bi in range(params.blocks_per_side):
        for bj in range(params.blocks_per_side):
            v = hist[bi:bi + b, bj:bj + b, :].ravel()
            v = v / np.sqrt(np.sum(v * v) + _HYS_EPS)
            v = np.minimum(v, params.clip)
            v = v / np.sqrt(np.sum(v * v) + _HYS_EPS)
            out.append(v)
    return np.concatenate(out)
