"""Session persistence, emotional-moment curation, and caregiver review.

One directory per session:

    session.json        metadata + config snapshot + current status
    frames.y8           concatenated raw greyscale payloads
    frames.idx          fixed-width binary index into frames.y8
    events.jsonl        estimates / cues / indicator transitions
    annotations.jsonl   append-only caregiver audit log (marks, comments,
                        status changes); replaying it reconstructs state

Everything is append-only and crash-tolerant: a torn final record in any
file is dropped on read, complete records always survive.  Deleting a
session removes the frame blob but keeps the metadata tombstone, events
and annotations.
"""

from __future__ import annotations

import errno
import json
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cue import CueEvent, EmotionEstimate, IndicatorEvent
from .protocol import FramePacket, LabelSet

FORMAT_VERSION = 1

STATUS_VISIBLE = "visible"
STATUS_HIDDEN = "hidden"
STATUS_DELETED = "deleted"
STATUSES = (STATUS_VISIBLE, STATUS_HIDDEN, STATUS_DELETED)

# sequence, timestamp_us, offset, width, height, kind, crop_x, crop_y
_IDX = struct.Struct("<IQQHHBHH")
INDEX_ENTRY_SIZE = _IDX.size


class SessionError(Exception):
    pass


class UnknownSession(SessionError):
    pass


class SessionClosed(SessionError):
    pass


class RangeOutOfBounds(SessionError):
    pass


class StorageFull(SessionError):
    pass


@dataclass(frozen=True)
class FrameIndexEntry:
    sequence: int
    timestamp_us: int
    offset: int
    width: int
    height: int
    kind: int
    crop_x: int
    crop_y: int

    @property
    def size(self) -> int:
        return self.width * self.height


def _wrap_enospc(fn, *args):
    try:
        return fn(*args)
    except OSError as e:
        if e.errno == errno.ENOSPC:
            raise StorageFull(str(e)) from e
        raise


class SessionWriter:
    """Single-writer append path used by the host engine."""

    def __init__(self, directory: str | Path, config: dict | None = None,
                 session_id: str | None = None):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        started = time.strftime("%Y-%m-%dT%H:%M:%S")
        meta = {
            "format_version": FORMAT_VERSION,
            "session_id": session_id or f"s-{time.strftime('%Y%m%d-%H%M%S')}",
            "started_at": started,
            "status": STATUS_VISIBLE,
            "config": config or {},
        }
        (self.dir / "session.json").write_text(json.dumps(meta, indent=2))
        self._blob = open(self.dir / "frames.y8", "ab")
        self._idx = open(self.dir / "frames.idx", "ab")
        self._events = open(self.dir / "events.jsonl", "a")
        (self.dir / "annotations.jsonl").touch()
        self._offset = self._blob.tell()
        self._closed = False

    def _check_open(self) -> None:
        if self._closed:
            raise SessionClosed(str(self.dir))

    def record_frame(self, packet: FramePacket) -> None:
        self._check_open()
        _wrap_enospc(self._blob.write, packet.payload)
        entry = _IDX.pack(packet.sequence, packet.timestamp_us, self._offset,
                          packet.width, packet.height, packet.kind,
                          packet.crop_x, packet.crop_y)
        _wrap_enospc(self._idx.write, entry)
        self._offset += len(packet.payload)

    def _event(self, doc: dict) -> None:
        self._check_open()
        _wrap_enospc(self._events.write, json.dumps(doc) + "\n")

    def record_estimate(self, est: EmotionEstimate) -> None:
        self._event({"type": "estimate", "at_us": est.timestamp_us,
                     "seq": est.sequence,
                     "face": list(est.face) if est.face else None,
                     "label": est.label,
                     "conf": round(est.confidence, 6),
                     "scores": [round(s, 6) for s in est.scores]})

    def record_cue(self, cue: CueEvent) -> None:
        self._event({"type": "cue", "at_us": cue.fired_at_us,
                     "label": cue.label, "conf": round(cue.confidence, 6),
                     "first_seq": cue.first_sequence,
                     "last_seq": cue.last_sequence})

    def record_indicator(self, ev: IndicatorEvent) -> None:
        self._event({"type": "indicator", "at_us": ev.at_us,
                     "face_present": ev.face_present,
                     "face": list(ev.face) if ev.face else None})

    def flush(self) -> None:
        self._check_open()
        for f in (self._blob, self._idx, self._events):
            f.flush()

    def close(self) -> None:
        if self._closed:
            return
        self.flush()
        for f in (self._blob, self._idx, self._events):
            f.close()
        self._closed = True


# --- readers ----------------------------------------------------------------

def _require(directory: str | Path) -> Path:
    d = Path(directory)
    if not (d / "session.json").exists():
        raise UnknownSession(str(directory))
    return d


def load_meta(directory: str | Path) -> dict:
    return json.loads((_require(directory) / "session.json").read_text())


def read_index(directory: str | Path) -> list[FrameIndexEntry]:
    """Complete, blob-backed index entries; torn tails are dropped."""
    d = _require(directory)
    idx_path = d / "frames.idx"
    if not idx_path.exists():
        return []
    raw = idx_path.read_bytes()
    whole = len(raw) - len(raw) % INDEX_ENTRY_SIZE
    blob_len = (d / "frames.y8").stat().st_size \
        if (d / "frames.y8").exists() else 0
    out = []
    for off in range(0, whole, INDEX_ENTRY_SIZE):
        e = FrameIndexEntry(*_IDX.unpack_from(raw, off))
        if e.offset + e.size > blob_len:
            break              # blob was torn before this entry's payload
        out.append(e)
    return out


def read_frame(directory: str | Path, entry: FrameIndexEntry) -> np.ndarray:
    d = _require(directory)
    with open(d / "frames.y8", "rb") as f:
        f.seek(entry.offset)
        data = f.read(entry.size)
    if len(data) != entry.size:
        raise RangeOutOfBounds(f"frame {entry.sequence} beyond blob")
    return np.frombuffer(data, dtype=np.uint8).reshape(entry.height,
                                                       entry.width)


def read_events(directory: str | Path) -> list[dict]:
    """All complete event records; a torn final line is ignored."""
    d = _require(directory)
    path = d / "events.jsonl"
    if not path.exists():
        return []
    out = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError:
            break              # torn tail
    return out


def read_annotations(directory: str | Path) -> list[dict]:
    d = _require(directory)
    path = d / "annotations.jsonl"
    if not path.exists():
        return []
    out = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError:
            break
    return out


def duration_ms(directory: str | Path) -> float:
    """Session length: the latest timestamp on record."""
    last = 0
    for e in read_events(directory):
        last = max(last, e.get("at_us", 0))
    for entry in read_index(directory):
        last = max(last, entry.timestamp_us)
    return last / 1000.0


# --- caregiver operations ---------------------------------------------------

def _append_annotation(directory: Path, doc: dict) -> None:
    with open(directory / "annotations.jsonl", "a") as f:
        _wrap_enospc(f.write, json.dumps(doc) + "\n")


def annotate(directory: str | Path, kind: str, start_ms: float,
             end_ms: float, text: str = "", author: str = "") -> dict:
    """Append a mark or comment; never mutates prior records."""
    d = _require(directory)
    if kind not in ("mark", "comment"):
        raise ValueError(f"annotation kind {kind!r}")
    total = duration_ms(d)
    if not 0 <= start_ms <= end_ms or end_ms > total:
        raise RangeOutOfBounds(
            f"[{start_ms}, {end_ms}] outside 0..{total:.0f} ms")
    doc = {"kind": kind, "start_ms": start_ms, "end_ms": end_ms,
           "text": text, "author": author,
           "created_at": time.strftime("%Y-%m-%dT%H:%M:%S")}
    _append_annotation(d, doc)
    return doc


def set_status(directory: str | Path, status: str) -> dict:
    """Append a status change; 'deleted' also drops the frame blob but
    keeps the metadata tombstone, events and annotations."""
    d = _require(directory)
    if status not in STATUSES:
        raise ValueError(f"status {status!r}")
    doc = {"kind": "status", "status": status,
           "created_at": time.strftime("%Y-%m-%dT%H:%M:%S")}
    _append_annotation(d, doc)
    meta = load_meta(d)
    meta["status"] = status
    (d / "session.json").write_text(json.dumps(meta, indent=2))
    if status == STATUS_DELETED:
        for name in ("frames.y8", "frames.idx"):
            path = d / name
            if path.exists():
                path.unlink()
    return doc


def replay_state(directory: str | Path) -> dict:
    """Reconstruct current status + annotation list purely from the log."""
    status = STATUS_VISIBLE
    annotations = []
    for doc in read_annotations(directory):
        if doc.get("kind") == "status":
            status = doc["status"]
        else:
            annotations.append(doc)
    return {"status": status, "annotations": annotations}


def list_sessions(root: str | Path) -> list[dict]:
    """Newest-first summaries of every session under root."""
    out = []
    for d in sorted(Path(root).iterdir()):
        if not (d / "session.json").exists():
            continue
        meta = load_meta(d)
        out.append({
            "session_id": meta.get("session_id", d.name),
            "path": str(d),
            "started_at": meta.get("started_at", ""),
            "status": meta.get("status", STATUS_VISIBLE),
            "duration_ms": round(duration_ms(d), 3),
            "frames": len(read_index(d)),
        })
    out.sort(key=lambda s: s["started_at"], reverse=True)
    return out


# --- emotional-moment curation ----------------------------------------------

@dataclass(frozen=True)
class CurationParams:
    confidence_floor: float = 0.65
    min_duration_ms: float = 1000.0
    merge_gap_ms: float = 500.0
    top_k: int = 10

    def validate(self) -> None:
        if not 0.0 <= self.confidence_floor <= 1.0:
            raise ValueError(f"confidence_floor {self.confidence_floor}")
        if self.min_duration_ms < 0 or self.merge_gap_ms < 0:
            raise ValueError("negative duration or gap")
        if self.top_k < 1:
            raise ValueError(f"top_k {self.top_k}")


@dataclass(frozen=True)
class Moment:
    label: int
    start_ms: float
    end_ms: float
    mean_confidence: float
    score: float               # mean confidence x duration in seconds
    rank: int

    @property
    def duration_ms(self) -> float:
        return self.end_ms - self.start_ms


Estimate = tuple[int, int | None, float]   # (timestamp_us, label, confidence)


def curate(estimates: list[Estimate], neutral_index: int,
           params: CurationParams | None = None) -> list[Moment]:
    """Top-k highlight reel from the raw per-frame estimate stream."""
    params = params or CurationParams()
    params.validate()

    # maximal qualifying runs per non-neutral label; any estimate that does
    # not qualify for the open label closes its run
    runs: dict[int, list[tuple[float, float, list[float]]]] = {}
    open_label: int | None = None
    open_run: tuple[float, float, list[float]] | None = None
    for ts_us, label, conf in estimates:
        ts = ts_us / 1000.0
        qualifying = (label is not None and label != neutral_index
                      and conf >= params.confidence_floor)
        if open_label is not None and (not qualifying or label != open_label):
            runs.setdefault(open_label, []).append(open_run)
            open_label = open_run = None
        if qualifying:
            if open_label is None:
                open_label, open_run = label, (ts, ts, [conf])
            else:
                start, _, confs = open_run
                confs.append(conf)
                open_run = (start, ts, confs)
    if open_label is not None:
        runs.setdefault(open_label, []).append(open_run)

    merged: list[tuple[int, float, float, list[float]]] = []
    for label, segs in runs.items():
        segs.sort(key=lambda s: s[0])
        acc = None
        for start, end, confs in segs:
            if acc is not None and start - acc[2] < params.merge_gap_ms:
                acc = (label, acc[1], end, acc[3] + confs)
            else:
                if acc is not None:
                    merged.append(acc)
                acc = (label, start, end, confs)
        if acc is not None:
            merged.append(acc)

    kept = [(label, start, end, confs) for label, start, end, confs in merged
            if end - start >= params.min_duration_ms]

    scored = []
    for label, start, end, confs in kept:
        mean_conf = sum(confs) / len(confs)
        scored.append((label, start, end, mean_conf,
                       mean_conf * (end - start) / 1000.0))
    scored.sort(key=lambda m: (-m[4], m[1], m[0]))
    return [Moment(label=label, start_ms=start, end_ms=end,
                   mean_confidence=mean_conf, score=score, rank=i + 1)
            for i, (label, start, end, mean_conf, score)
            in enumerate(scored[:params.top_k])]


def estimates_from_events(events: list[dict]) -> list[Estimate]:
    return [(e["at_us"], e["label"], e["conf"])
            for e in events if e.get("type") == "estimate"]


def timeline(directory: str | Path, labels: LabelSet,
             params: CurationParams | None = None) -> dict:
    """Chronological review document: moments, cues, indicator
    transitions and caregiver annotations."""
    d = _require(directory)
    events = read_events(d)
    moments = curate(estimates_from_events(events), labels.neutral_index,
                     params)
    state = replay_state(d)
    entries = []
    for m in moments:
        entries.append({"type": "moment", "start_ms": m.start_ms,
                        "end_ms": m.end_ms,
                        "label": labels.name_of(m.label),
                        "mean_confidence": round(m.mean_confidence, 4),
                        "score": round(m.score, 4), "rank": m.rank})
    for e in events:
        if e["type"] == "cue":
            entries.append({"type": "cue", "start_ms": e["at_us"] / 1000.0,
                            "label": labels.name_of(e["label"]),
                            "confidence": e["conf"]})
        elif e["type"] == "indicator":
            entries.append({"type": "indicator",
                            "start_ms": e["at_us"] / 1000.0,
                            "face_present": e["face_present"]})
    for a in state["annotations"]:
        entries.append({"type": "annotation", "start_ms": a["start_ms"],
                        "end_ms": a["end_ms"], "kind": a["kind"],
                        "text": a.get("text", "")})
    entries.sort(key=lambda e: (e["start_ms"], e["type"]))
    meta = load_meta(d)
    return {"session_id": meta.get("session_id"),
            "status": state["status"],
            "duration_ms": round(duration_ms(d), 3),
            "entries": entries}
