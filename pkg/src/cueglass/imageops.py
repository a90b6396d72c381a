"""Small greyscale raster helpers shared by capture, crop and vision code."""

from __future__ import annotations

import numpy as np


def box_downsample(image: np.ndarray, factor: int) -> np.ndarray:
    """Average non-overlapping factor x factor blocks.  Trailing rows or
    columns that do not fill a block are discarded."""
    if factor < 1:
        raise ValueError(f"factor {factor}")
    if factor == 1:
        return image.copy()
    h, w = image.shape
    th, tw = h // factor, w // factor
    if th == 0 or tw == 0:
        raise ValueError(f"{image.shape} too small for factor {factor}")
    blocks = image[: th * factor, : tw * factor].astype(np.float64)
    blocks = blocks.reshape(th, factor, tw, factor).mean(axis=(1, 3))
    if image.dtype == np.uint8:
        return np.rint(blocks).astype(np.uint8)
    return blocks


def bilinear_resize(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Corner-aligned bilinear resample: output corners equal input corners."""
    if out_h < 1 or out_w < 1:
        raise ValueError(f"target {out_h}x{out_w}")
    src = image.astype(np.float64)
    h, w = src.shape
    ys = np.linspace(0.0, h - 1.0, out_h) if out_h > 1 else np.array([(h - 1) / 2.0])
    xs = np.linspace(0.0, w - 1.0, out_w) if out_w > 1 else np.array([(w - 1) / 2.0])
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    tl = src[np.ix_(y0, x0)]
    tr = src[np.ix_(y0, x1)]
    bl = src[np.ix_(y1, x0)]
    br = src[np.ix_(y1, x1)]
    out = (tl * (1 - fy) * (1 - fx) + tr * (1 - fy) * fx
           + bl * fy * (1 - fx) + br * fy * fx)
    if image.dtype == np.uint8:
        return np.rint(out).astype(np.uint8)
    return out


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(3.0 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(image: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian with symmetric (reflect) edge padding."""
    k = gaussian_kernel(sigma)
    r = len(k) // 2
    src = image.astype(np.float64)
    padded = np.pad(src, ((0, 0), (r, r)), mode="symmetric")
    win = np.lib.stride_tricks.sliding_window_view(padded, len(k), axis=1)
    out = win @ k
    padded = np.pad(out, ((r, r), (0, 0)), mode="symmetric")
    win = np.lib.stride_tricks.sliding_window_view(padded, len(k), axis=0)
    return win @ k


def draw_ellipse(image: np.ndarray, cx: float, cy: float,
                 rx: float, ry: float, value: int) -> None:
    """Fill an axis-aligned ellipse in place, clipped to the image."""
    h, w = image.shape
    x_lo = max(0, int(np.floor(cx - rx)))
    x_hi = min(w, int(np.ceil(cx + rx)) + 1)
    y_lo = max(0, int(np.floor(cy - ry)))
    y_hi = min(h, int(np.ceil(cy + ry)) + 1)
    if x_lo >= x_hi or y_lo >= y_hi:
        return
    ys = np.arange(y_lo, y_hi, dtype=np.float64)[:, None]
    xs = np.arange(x_lo, x_hi, dtype=np.float64)[None, :]
    mask = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0
    region = image[y_lo:y_hi, x_lo:x_hi]
    region[mask] = value


def draw_polyline(image: np.ndarray, points: np.ndarray,
                  value: int, thickness: float) -> None:
    """Stamp small discs along a polyline; good enough for face glyphs."""
    h, w = image.shape
    pts = np.asarray(points, dtype=np.float64)
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        n = max(2, int(np.hypot(x1 - x0, y1 - y0) * 2))
        for t in np.linspace(0.0, 1.0, n):
            x = x0 + (x1 - x0) * t
            y = y0 + (y1 - y0) * t
            draw_ellipse(image, x, y, thickness, thickness, value)
