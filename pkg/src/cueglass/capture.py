"""Frame sources for the device agent.

SyntheticScene renders a deterministic desk scene: a static noise
background and a bright elliptical face whose ground-truth location is
known analytically.  Expression segments swap the mouth/brow glyph so the
vision pipeline has something real to classify, and trajectories exercise
the crop controller (stationary, linear, sinusoidal, teleport).  Frames
are stamped with simulated time (frame_index / fps), so every downstream
timestamp is reproducible under a fixed seed.

DirectorySource plays back a folder of .npy greyscale arrays at the same
cadence, for desk captures recorded elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import imageops

Rect = tuple[int, int, int, int]

FACE_VALUE = 215
FEATURE_VALUE = 55


@dataclass(frozen=True)
class GroundTruth:
    center: tuple[float, float]
    rect: Rect
    label: str


@dataclass
class SceneParams:
    width: int = 1280
    height: int = 776
    face_rx: float = 60.0
    face_ry: float = 72.0
    # trajectory: {"kind": "stationary"|"linear"|"sine"|"teleport"|"none", ...}
    trajectory: dict = field(default_factory=lambda: {"kind": "stationary"})
    # script: [[start_s, end_s, label], ...]; "absent" hides the face;
    # gaps default to neutral
    script: list = field(default_factory=list)
    seed: int = 0


class SyntheticScene:
    def __init__(self, params: SceneParams | None = None):
        self.params = params or SceneParams()
        rng = np.random.default_rng(self.params.seed)
        p = self.params
        self.background = rng.integers(20, 90, size=(p.height, p.width),
                                       dtype=np.uint8)

    # -- ground truth --------------------------------------------------------

    def label_at(self, t_s: float) -> str:
        for start, end, label in self.params.script:
            if start <= t_s < end:
                return label
        return "neutral"

    def center_at(self, t_s: float) -> tuple[float, float] | None:
        p = self.params
        traj = p.trajectory
        kind = traj.get("kind", "stationary")
        cx0 = traj.get("x", p.width / 2.0)
        cy0 = traj.get("y", p.height / 2.0)
        if kind == "none":
            return None
        if kind == "stationary":
            cx, cy = cx0, cy0
        elif kind == "linear":
            cx = cx0 + traj.get("vx", 40.0) * t_s
            cy = cy0 + traj.get("vy", 0.0) * t_s
        elif kind == "sine":
            amp = traj.get("amplitude", 150.0)
            period = traj.get("period_s", 4.0)
            cx = cx0 + amp * math.sin(2.0 * math.pi * t_s / period)
            cy = cy0
        elif kind == "teleport":
            cx, cy = cx0, cy0
            for at, x, y in traj.get("jumps", []):
                if t_s >= at:
                    cx, cy = x, y
        else:
            raise ValueError(f"trajectory {kind!r}")
        # keep the ellipse inside the frame
        cx = min(max(cx, p.face_rx), p.width - p.face_rx)
        cy = min(max(cy, p.face_ry), p.height - p.face_ry)
        return cx, cy

    def ground_truth(self, t_s: float) -> GroundTruth | None:
        label = self.label_at(t_s)
        center = self.center_at(t_s)
        if center is None or label == "absent":
            return None
        cx, cy = center
        p = self.params
        rect = (int(round(cx - p.face_rx)), int(round(cy - p.face_ry)),
                int(round(2 * p.face_rx)), int(round(2 * p.face_ry)))
        return GroundTruth(center=(cx, cy), rect=rect, label=label)

    # -- rendering -----------------------------------------------------------

    def render(self, t_s: float) -> np.ndarray:
        frame = self.background.copy()
        truth = self.ground_truth(t_s)
        if truth is not None:
            cx, cy = truth.center
            p = self.params
            imageops.draw_ellipse(frame, cx, cy, p.face_rx, p.face_ry,
                                  FACE_VALUE)
            _draw_expression(frame, cx, cy, p.face_rx, p.face_ry, truth.label)
        return frame


def _draw_expression(frame: np.ndarray, cx: float, cy: float,
                     rx: float, ry: float, label: str) -> None:
    dark = FEATURE_VALUE
    thick = max(1.5, rx * 0.06)
    # eyes are label-independent
    for side in (-1, 1):
        imageops.draw_ellipse(frame, cx + side * 0.38 * rx, cy - 0.30 * ry,
                              0.13 * rx, 0.11 * ry, dark)
    mouth_y = cy + 0.42 * ry
    half = 0.52 * rx
    xs = np.linspace(-half, half, 17)

    if label == "happy":      # corners up
        ys = mouth_y + 0.22 * ry * (1.0 - (xs / half) ** 2) - 0.11 * ry
    elif label == "sad":      # corners down
        ys = mouth_y - 0.22 * ry * (1.0 - (xs / half) ** 2) + 0.11 * ry
    elif label == "angry":    # flat mouth plus a heavy unibrow
        ys = np.full_like(xs, mouth_y)
        brow = np.stack([cx + xs, np.full_like(xs, cy - 0.52 * ry)], axis=1)
        imageops.draw_polyline(frame, brow, dark, thick * 1.6)
    elif label == "scared":   # small open mouth
        imageops.draw_ellipse(frame, cx, mouth_y, 0.16 * rx, 0.20 * ry, dark)
        imageops.draw_ellipse(frame, cx, mouth_y, 0.08 * rx, 0.10 * ry,
                              FACE_VALUE)
        return
    elif label == "surprised":  # wide open mouth
        imageops.draw_ellipse(frame, cx, mouth_y, 0.34 * rx, 0.34 * ry, dark)
        imageops.draw_ellipse(frame, cx, mouth_y, 0.20 * rx, 0.20 * ry,
                              FACE_VALUE)
        return
    elif label == "disgust":  # zigzag
        ys = mouth_y + 0.14 * ry * np.sign(np.sin(xs / half * 2.5 * math.pi))
    elif label == "contempt":  # one corner raised
        ys = mouth_y - 0.26 * ry * (xs / (2 * half)) - 0.07 * ry
    else:                     # neutral: flat line
        ys = np.full_like(xs, mouth_y)
    imageops.draw_polyline(frame, np.stack([cx + xs, ys], axis=1), dark, thick)


class SyntheticSource:
    """Pull-based frame source; stamps simulated time at the nominal rate."""

    def __init__(self, scene: SyntheticScene, fps: float = 30.0):
        if fps <= 0:
            raise ValueError(f"fps {fps}")
        self.scene = scene
        self.fps = fps
        self.index = 0

    @property
    def geometry(self) -> tuple[int, int]:
        return self.scene.params.width, self.scene.params.height

    def next_frame(self) -> tuple[int, np.ndarray]:
        t_s = self.index / self.fps
        ts_us = round(t_s * 1_000_000)
        frame = self.scene.render(t_s)
        self.index += 1
        return ts_us, frame


class DirectorySource:
    """Plays .npy uint8 greyscale frames from a folder, sorted, cycling."""

    def __init__(self, path: str | Path, fps: float = 30.0):
        self.paths = sorted(Path(path).glob("*.npy"))
        if not self.paths:
            raise FileNotFoundError(f"no .npy frames under {path}")
        first = np.load(self.paths[0])
        if first.ndim != 2 or first.dtype != np.uint8:
            raise ValueError(f"{self.paths[0]} is not 2-d uint8")
        self._shape = first.shape
        self.fps = fps
        self.index = 0

    @property
    def geometry(self) -> tuple[int, int]:
        return self._shape[1], self._shape[0]

    def next_frame(self) -> tuple[int, np.ndarray]:
        ts_us = round(self.index / self.fps * 1_000_000)
        frame = np.load(self.paths[self.index % len(self.paths)])
        if frame.shape != self._shape:
            raise ValueError(f"frame {self.index} shape {frame.shape}")
        self.index += 1
        return ts_us, frame
