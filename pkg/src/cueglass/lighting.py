"""Lighting normalization for face windows.

Gamma compression, difference-of-Gaussians bandpass, then two-stage
contrast equalization with a final saturating tanh.  Output is zero-mean-ish,
bounded to (-tau, tau), and invariant to global intensity gain, which is
what the downstream gradient features want.
"""

from __future__ import annotations

import numpy as np

from .imageops import gaussian_blur


class EmptyImage(Exception):
    pass


_EPS = 1e-12


def difference_of_gaussians(image: np.ndarray, sigma0: float = 1.0,
                            sigma1: float = 2.0) -> np.ndarray:
    """Narrow minus wide blur; the bandpass core of the chain."""
    return gaussian_blur(image, sigma0) - gaussian_blur(image, sigma1)


def normalize_lighting(image: np.ndarray, gamma: float = 0.2,
                       sigma0: float = 1.0, sigma1: float = 2.0,
                       alpha: float = 0.1, tau: float = 10.0) -> np.ndarray:
    """Full chain on a greyscale window; returns float64, same shape."""
    if image.size == 0:
        raise EmptyImage(str(image.shape))
    x = image.astype(np.float64)
    if image.dtype == np.uint8:
        x = x / 255.0
    x = np.power(np.maximum(x, 0.0), gamma)
    x = difference_of_gaussians(x, sigma0, sigma1)
    x = x / (np.mean(np.abs(x) ** alpha) ** (1.0 / alpha) + _EPS)
    x = x / (np.mean(np.minimum(np.abs(x), tau) ** alpha) ** (1.0 / alpha) + _EPS)
    return tau * np.tanh(x / tau)
