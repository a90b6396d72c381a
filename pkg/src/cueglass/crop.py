"""Dual-resolution crop controller for the device agent.

With no face in view the device streams box-filtered low-res full frames.
Once the host reports a face rectangle the controller keeps a native-res
crop around an exponentially smoothed face track and streams that instead.
The crop rectangle only moves when the smoothed center drifts outside a
deadband; it then follows the smoothed path until the motion quantizes to
zero, which both holds the frame steady and converges onto the face.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import imageops
from .protocol import (KIND_CROP, KIND_FULL, MAX_FRAME_PAYLOAD, FramePacket)


class CropMode(enum.Enum):
    FULL_FRAME = "full_frame"
    FACE_CROP = "face_crop"


Rect = tuple[int, int, int, int]  # x, y, w, h


@dataclass(frozen=True)
class CropParams:
    alpha_center: float = 0.3
    alpha_size: float = 0.1
    deadband_frac: float = 0.15
    margin_factor: float = 1.8
    lost_threshold: int = 15

    def validate(self) -> None:
        if not 0.0 < self.alpha_center <= 1.0:
            raise ValueError(f"alpha_center {self.alpha_center}")
        if not 0.0 < self.alpha_size <= 1.0:
            raise ValueError(f"alpha_size {self.alpha_size}")
        if self.deadband_frac < 0.0:
            raise ValueError(f"deadband_frac {self.deadband_frac}")
        if self.margin_factor < 1.0:
            raise ValueError(f"margin_factor {self.margin_factor}")
        if self.lost_threshold < 1:
            raise ValueError(f"lost_threshold {self.lost_threshold}")


@dataclass(frozen=True)
class CropState:
    source_w: int
    source_h: int
    params: CropParams
    mode: CropMode
    # Smoothed face track; None until the first face is seen.
    smoothed_cx: float | None = None
    smoothed_cy: float | None = None
    smoothed_w: float | None = None
    smoothed_h: float | None = None
    active_crop: Rect | None = None
    frames_since_face: int = 0
    tracking: bool = False

    @classmethod
    def initial(cls, source_w: int, source_h: int,
                params: CropParams | None = None) -> "CropState":
        params = params or CropParams()
        params.validate()
        return cls(source_w=source_w, source_h=source_h, params=params,
                   mode=CropMode.FULL_FRAME,
                   frames_since_face=params.lost_threshold)

    def crop_center(self) -> tuple[float, float]:
        x, y, w, h = self.active_crop
        return x + w / 2.0, y + h / 2.0


def _fit_rect(state: CropState) -> Rect:
    """Integer crop rect for the current smoothed track: margin-scaled,
    clamped to the source and to the datagram payload bound."""
    p = state.params
    w = p.margin_factor * state.smoothed_w
    h = p.margin_factor * state.smoothed_h
    w = min(w, float(state.source_w))
    h = min(h, float(state.source_h))
    w = max(w, 8.0)
    h = max(h, 8.0)
    if w * h > MAX_FRAME_PAYLOAD:
        scale = math.sqrt(MAX_FRAME_PAYLOAD / (w * h))
        w *= scale
        h *= scale
    wi = max(8, int(w))
    hi = max(8, int(h))
    while wi * hi > MAX_FRAME_PAYLOAD:  # integer truncation safety
        wi -= 1
    x = int(round(state.smoothed_cx - wi / 2.0))
    y = int(round(state.smoothed_cy - hi / 2.0))
    x = min(max(x, 0), state.source_w - wi)
    y = min(max(y, 0), state.source_h - hi)
    return (x, y, wi, hi)


def update_crop(state: CropState, observation: Rect | None) -> CropState:
    """Advance the controller by one host observation.

    observation is a face rectangle in source coordinates, or None when the
    host saw no face.  lost_threshold consecutive Nones drop back to
    FULL_FRAME and reset the smoothing state.
    """
    p = state.params
    if observation is None:
        misses = state.frames_since_face + 1
        if misses >= p.lost_threshold:
            return replace(state, mode=CropMode.FULL_FRAME,
                           smoothed_cx=None, smoothed_cy=None,
                           smoothed_w=None, smoothed_h=None,
                           active_crop=None, tracking=False,
                           frames_since_face=misses)
        return replace(state, frames_since_face=misses)

    ox, oy, ow, oh = observation
    if not (0 <= ox and 0 <= oy and ow > 0 and oh > 0
            and ox + ow <= state.source_w and oy + oh <= state.source_h):
        raise ValueError(f"observation {observation} outside source bounds")
    ocx = ox + ow / 2.0
    ocy = oy + oh / 2.0

    if state.smoothed_cx is None:
        state = replace(state, smoothed_cx=ocx, smoothed_cy=ocy,
                        smoothed_w=float(ow), smoothed_h=float(oh),
                        mode=CropMode.FACE_CROP, frames_since_face=0,
                        tracking=False)
        return replace(state, active_crop=_fit_rect(state))

    # smoothed <- smoothed + alpha * (observed - smoothed)
    cx = state.smoothed_cx + p.alpha_center * (ocx - state.smoothed_cx)
    cy = state.smoothed_cy + p.alpha_center * (ocy - state.smoothed_cy)
    sw = state.smoothed_w + p.alpha_size * (ow - state.smoothed_w)
    sh = state.smoothed_h + p.alpha_size * (oh - state.smoothed_h)
    state = replace(state, smoothed_cx=cx, smoothed_cy=cy,
                    smoothed_w=sw, smoothed_h=sh,
                    mode=CropMode.FACE_CROP, frames_since_face=0)

    ax, ay, aw, ah = state.active_crop
    ccx = ax + aw / 2.0
    ccy = ay + ah / 2.0
    deviation = math.hypot(cx - ccx, cy - ccy)
    size_dev = abs(p.margin_factor * sw - aw) / aw
    tracking = state.tracking
    if deviation > p.deadband_frac * aw or size_dev > p.deadband_frac:
        tracking = True
    if tracking:
        new_rect = _fit_rect(state)
        if new_rect == state.active_crop:
            tracking = False  # motion quantized away; hold steady again
        return replace(state, active_crop=new_rect, tracking=tracking)
    return state


def select_transmission(state: CropState, frame: np.ndarray,
                        low_w: int, low_h: int,
                        sequence: int, timestamp_us: int) -> FramePacket:
    """Turn a native frame into the packet the current mode calls for."""
    src_h, src_w = frame.shape
    if (src_w, src_h) != (state.source_w, state.source_h):
        raise ValueError(f"frame {frame.shape} vs state "
                         f"{state.source_h}x{state.source_w}")
    if state.mode is CropMode.FULL_FRAME or state.active_crop is None:
        fx = src_w // low_w
        fy = src_h // low_h
        if fx < 1 or fy < 1 or fx != fy or low_w * fx != src_w or low_h * fy != src_h:
            raise ValueError(
                f"native {src_w}x{src_h} not an integer multiple of "
                f"low-res {low_w}x{low_h}")
        small = imageops.box_downsample(frame, fx)
        return FramePacket(KIND_FULL, sequence, timestamp_us,
                           src_w, src_h, low_w, low_h, 0, 0,
                           small.astype(np.uint8).tobytes())

    x, y, w, h = state.active_crop
    region = frame[y:y + h, x:x + w]
    if w * h > MAX_FRAME_PAYLOAD:
        k = 2
        while (w // k) * (h // k) > MAX_FRAME_PAYLOAD:
            k += 1
        region = imageops.box_downsample(region, k)
        h, w = region.shape
    return FramePacket(KIND_CROP, sequence, timestamp_us,
                       src_w, src_h, w, h, x, y,
                       region.astype(np.uint8).tobytes())
