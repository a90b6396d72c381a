"""Cue rendering for the device display and speaker.

Rendering is modality-typed records rather than pixels or audio: each cue
becomes one record per enabled modality (text, color wash, smiley, audio
narration), and indicator transitions become face-indicator records.  A
record log is the desk-scale stand-in for the heads-up display.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cue import CueEvent, IndicatorEvent
from .protocol import LabelSet


class UnknownLabel(Exception):
    pass


MODALITIES = ("text", "color", "smiley", "audio")
INDICATOR_STYLES = ("box", "line", "triangle", "none")

DEFAULT_COLORS = {
    "happy": "#ffd24d",
    "sad": "#4169e1",
    "angry": "#e03131",
    "scared": "#9b59b6",
    "surprised": "#ff8c00",
    "disgust": "#2e8b57",
    "contempt": "#708090",
    "neutral": "#d0d0d0",
}

DEFAULT_SMILEYS = {
    "happy": ":)",
    "sad": ":(",
    "angry": ">:(",
    "scared": ":-s",
    "surprised": ":O",
    "disgust": ":p~",
    "contempt": ":-/",
    "neutral": ":|",
}


def _default_map(labels: LabelSet, table: dict[str, str],
                 fallback: str) -> dict[str, str]:
    return {name: table.get(name, fallback) for name in labels.labels}


@dataclass
class CueRenderSpec:
    """Which modalities are on, and what each label maps to per modality."""

    labels: LabelSet
    modalities: tuple[str, ...] = ("text", "color")
    indicator_style: str = "box"
    color_map: dict[str, str] = field(default_factory=dict)
    smiley_map: dict[str, str] = field(default_factory=dict)
    audio_name_map: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for m in self.modalities:
            if m not in MODALITIES:
                raise ValueError(f"modality {m!r}")
        if self.indicator_style not in INDICATOR_STYLES:
            raise ValueError(f"indicator style {self.indicator_style!r}")
        if not self.color_map:
            self.color_map = _default_map(self.labels, DEFAULT_COLORS, "#ffffff")
        if not self.smiley_map:
            self.smiley_map = _default_map(self.labels, DEFAULT_SMILEYS, ":|")
        if not self.audio_name_map:
            self.audio_name_map = {n: f"say_{n}" for n in self.labels.labels}
        for m, table in (("color", self.color_map), ("smiley", self.smiley_map),
                         ("audio", self.audio_name_map)):
            if m in self.modalities:
                missing = [n for n in self.labels.labels if n not in table]
                if missing:
                    raise UnknownLabel(f"{m} map missing {missing}")


def render_cue(spec: CueRenderSpec,
               event: CueEvent | IndicatorEvent) -> list[dict]:
    """One render record per enabled modality (cues) or one indicator
    record (indicator transitions)."""
    if isinstance(event, IndicatorEvent):
        if spec.indicator_style == "none":
            return []
        return [{
            "kind": "indicator",
            "style": spec.indicator_style,
            "face_present": event.face_present,
            "rect": list(event.face) if event.face else None,
            "at_us": event.at_us,
        }]

    if not 0 <= event.label < len(spec.labels):
        raise UnknownLabel(str(event.label))
    name = spec.labels.name_of(event.label)
    records = []
    for m in spec.modalities:
        rec = {"kind": "cue", "modality": m, "label": name,
               "confidence": round(event.confidence, 6),
               "at_us": event.fired_at_us}
        if m == "text":
            rec["value"] = name
        elif m == "color":
            rec["value"] = spec.color_map[name]
        elif m == "smiley":
            rec["value"] = spec.smiley_map[name]
        else:
            rec["value"] = spec.audio_name_map[name]
        records.append(rec)
    return records
