"""First-order thermal throttle model for the device agent.

Sending frames deposits heat, idle time dissipates it, and the effective
frame rate is scaled down linearly once the temperature passes a
threshold.  Parameters default to values under which a sustained 30 fps
session starts throttling a few simulated minutes in, well inside the
30-minute session cap.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ThermalParams:
    heat_per_frame: float = 0.02
    cooling_rate: float = 0.4        # per second
    throttle_threshold: float = 60.0
    min_fps_factor: float = 0.5

    def validate(self) -> None:
        if self.heat_per_frame < 0 or self.cooling_rate < 0:
            raise ValueError("negative heat or cooling rate")
        if self.throttle_threshold <= 0:
            raise ValueError(f"threshold {self.throttle_threshold}")
        if not 0.0 < self.min_fps_factor <= 1.0:
            raise ValueError(f"min_fps_factor {self.min_fps_factor}")


@dataclass(frozen=True)
class ThermalState:
    params: ThermalParams
    temperature: float = 0.0

    @classmethod
    def initial(cls, params: ThermalParams | None = None) -> "ThermalState":
        params = params or ThermalParams()
        params.validate()
        return cls(params=params)


def fps_factor(state: ThermalState) -> float:
    """1.0 at or below the threshold, linear down to min_fps_factor at
    twice the threshold, clamped beyond.  Non-increasing in temperature."""
    p = state.params
    t = state.temperature
    if t <= p.throttle_threshold:
        return 1.0
    span = p.throttle_threshold
    frac = min(1.0, (t - p.throttle_threshold) / span)
    return 1.0 - frac * (1.0 - p.min_fps_factor)


def step_thermal(state: ThermalState, frames_sent: int,
                 elapsed_s: float) -> ThermalState:
    if frames_sent < 0 or elapsed_s < 0:
        raise ValueError("negative step")
    p = state.params
    t = state.temperature + p.heat_per_frame * frames_sent \
        - p.cooling_rate * elapsed_s
    return replace(state, temperature=max(0.0, t))
