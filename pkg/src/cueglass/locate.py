"""Face locators: payload image in, face rectangle out (or None).

Both implementations are intensity-blob detectors sized for desk scenes.
The synthetic-oracle variant assumes the scene convention that the face is
the brightest region and fits an ellipse to it via image moments; the
heuristic variant thresholds adaptively so it also works on frame
directories with unknown brightness.  Rectangles are in the coordinates of
the image handed in; map_to_source() lifts them to source coordinates
using the frame packet's geometry.
"""

from __future__ import annotations

import numpy as np

from .protocol import KIND_CROP, FramePacket

Rect = tuple[int, int, int, int]


def _moment_rect(image: np.ndarray, mask: np.ndarray,
                 min_area: int) -> Rect | None:
    count = int(mask.sum())
    if count < min_area:
        return None
    ys, xs = np.nonzero(mask)
    cx = xs.mean()
    cy = ys.mean()
    # a uniform ellipse with semi-axis a has second moment a^2/4
    rx = 2.0 * np.sqrt(np.mean((xs - cx) ** 2) + 0.25)
    ry = 2.0 * np.sqrt(np.mean((ys - cy) ** 2) + 0.25)
    h, w = image.shape
    x0 = max(0, int(round(cx - rx)))
    y0 = max(0, int(round(cy - ry)))
    x1 = min(w, int(round(cx + rx)))
    y1 = min(h, int(round(cy + ry)))
    if x1 <= x0 or y1 <= y0:
        return None
    return (x0, y0, x1 - x0, y1 - y0)


class SyntheticOracleLocator:
    """Brightest-ellipse fit matching the synthetic scene's face contrast."""

    def __init__(self, brightness_margin: int = 50, min_area: int = 24):
        self.brightness_margin = brightness_margin
        self.min_area = min_area

    def locate(self, image: np.ndarray) -> Rect | None:
        peak = int(image.max())
        if peak < self.brightness_margin + 40:
            return None           # nothing bright enough to be the face
        mask = image >= peak - self.brightness_margin
        return _moment_rect(image, mask, self.min_area)


class HeuristicBlobLocator:
    """Adaptive mean + k*std threshold for scenes with unknown levels."""

    def __init__(self, k_std: float = 2.0, min_area_frac: float = 0.001):
        self.k_std = k_std
        self.min_area_frac = min_area_frac

    def locate(self, image: np.ndarray) -> Rect | None:
        x = image.astype(np.float64)
        thresh = x.mean() + self.k_std * x.std()
        if thresh >= 255.0:
            return None
        mask = x >= thresh
        min_area = max(16, int(self.min_area_frac * image.size))
        return _moment_rect(image, mask, min_area)


def make_locator(name: str):
    if name == "synthetic":
        return SyntheticOracleLocator()
    if name == "heuristic":
        return HeuristicBlobLocator()
    raise ValueError(f"locator {name!r}")


def map_to_source(rect: Rect, packet: FramePacket) -> Rect:
    """Lift a payload-coordinate rectangle into source coordinates."""
    x, y, w, h = rect
    if packet.kind == KIND_CROP:
        return (x + packet.crop_x, y + packet.crop_y, w, h)
    sx = packet.source_width / packet.width
    sy = packet.source_height / packet.height
    return (int(round(x * sx)), int(round(y * sy)),
            max(1, int(round(w * sx))), max(1, int(round(h * sy))))
