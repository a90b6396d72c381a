"""Cue-rate filtering: raw per-frame estimates in, sparse stable cues out.

A cue fires only after sustain_frames consecutive qualifying estimates of
one label (or its related group), and same-group cues are separated by at
least refractory_ms.  Neutral frames, low-confidence frames and face
dropouts reset the candidate.  The face indicator is a separate two-frame
debounce on face presence.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .protocol import LabelSet

Rect = tuple[int, int, int, int]


@dataclass(frozen=True)
class EmotionEstimate:
    """Host verdict for one frame.  label None means no face or no call."""

    sequence: int
    timestamp_us: int
    face: Rect | None
    label: int | None
    confidence: float
    scores: tuple[float, ...] = ()

    @property
    def face_present(self) -> bool:
        return self.face is not None


@dataclass(frozen=True)
class CueEvent:
    label: int
    confidence: float            # mean over the sustained window
    fired_at_us: int
    first_sequence: int
    last_sequence: int


@dataclass(frozen=True)
class IndicatorEvent:
    face_present: bool
    face: Rect | None
    at_us: int


@dataclass(frozen=True)
class CueFilterParams:
    sustain_frames: int = 5
    confidence_floor: float = 0.65
    refractory_ms: float = 2000.0
    # label index -> group id; labels absent from the map are their own group
    related_groups: dict[int, int] = field(default_factory=dict)

    def validate(self) -> None:
        if self.sustain_frames < 1:
            raise ValueError(f"sustain_frames {self.sustain_frames}")
        if not 0.0 <= self.confidence_floor <= 1.0:
            raise ValueError(f"confidence_floor {self.confidence_floor}")
        if self.refractory_ms < 0:
            raise ValueError(f"refractory_ms {self.refractory_ms}")

    def group_of(self, label: int) -> int:
        # singleton groups by default; grouped labels share negative ids
        return self.related_groups.get(label, label + 1_000_000)

    @classmethod
    def from_label_groups(cls, labels: LabelSet,
                          groups: list[list[str]] | None = None,
                          **kw) -> "CueFilterParams":
        mapping: dict[int, int] = {}
        for gid, names in enumerate(groups or []):
            for name in names:
                mapping[labels.index_of(name)] = -(gid + 1)
        return cls(related_groups=mapping, **kw)


@dataclass(frozen=True)
class CueFilterState:
    params: CueFilterParams
    neutral_index: int
    candidate: int | None = None
    consecutive: int = 0
    window_conf: tuple[float, ...] = ()
    window_first_seq: int = 0
    last_fired_label: int | None = None
    last_fired_at_us: int | None = None

    @classmethod
    def initial(cls, params: CueFilterParams | None = None,
                neutral_index: int = LabelSet.default().neutral_index
                ) -> "CueFilterState":
        params = params or CueFilterParams()
        params.validate()
        return cls(params=params, neutral_index=neutral_index)


def step_filter(state: CueFilterState, est: EmotionEstimate
                ) -> tuple[CueFilterState, CueEvent | None]:
    """Pure transition: feed one estimate, maybe get one cue."""
    p = state.params
    qualifying = (est.label is not None
                  and est.label != state.neutral_index
                  and est.confidence >= p.confidence_floor)
    if not qualifying:
        if state.candidate is None and state.consecutive == 0:
            return state, None
        return replace(state, candidate=None, consecutive=0,
                       window_conf=()), None

    if state.candidate is not None and \
            p.group_of(est.label) == p.group_of(state.candidate):
        count = state.consecutive + 1
        first_seq = state.window_first_seq
        window = state.window_conf + (est.confidence,)
    else:
        count = 1
        first_seq = est.sequence
        window = (est.confidence,)
    if count > p.sustain_frames:
        count = p.sustain_frames              # clamp, keep trying to fire
        window = window[-p.sustain_frames:]
    state = replace(state, candidate=est.label, consecutive=count,
                    window_conf=window, window_first_seq=first_seq)

    if count < p.sustain_frames:
        return state, None
    refractory_ok = (
        state.last_fired_at_us is None
        or est.timestamp_us - state.last_fired_at_us >= p.refractory_ms * 1000.0
        or p.group_of(est.label) != p.group_of(state.last_fired_label))
    if not refractory_ok:
        return state, None
    event = CueEvent(label=est.label,
                     confidence=sum(window) / len(window),
                     fired_at_us=est.timestamp_us,
                     first_sequence=first_seq,
                     last_sequence=est.sequence)
    state = replace(state, candidate=None, consecutive=0, window_conf=(),
                    last_fired_label=est.label,
                    last_fired_at_us=est.timestamp_us)
    return state, event


@dataclass(frozen=True)
class IndicatorState:
    """Debounced face-presence latch; transitions need debounce_frames
    consecutive frames of the new value."""

    reported: bool = False
    pending: bool = False
    pending_count: int = 0
    debounce_frames: int = 2


def step_indicator(state: IndicatorState, est: EmotionEstimate
                   ) -> tuple[IndicatorState, IndicatorEvent | None]:
    value = est.face_present
    if value == state.reported:
        if state.pending_count:
            state = replace(state, pending_count=0)
        return state, None
    if value == state.pending and state.pending_count:
        count = state.pending_count + 1
    else:
        count = 1
    if count < state.debounce_frames:
        return replace(state, pending=value, pending_count=count), None
    event = IndicatorEvent(face_present=value, face=est.face,
                           at_us=est.timestamp_us)
    return replace(state, reported=value, pending=value, pending_count=0), event
