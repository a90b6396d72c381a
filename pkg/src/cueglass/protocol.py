"""Wire protocol for the device<->host UDP link.

Two little-endian packed messages share one socket, multiplexed by a kind
byte: FramePacket (device -> host, kind 0 full frame / 1 face crop) and
ResultPacket (host -> device, kind 2).  Layout is frozen in protocol.md.
Decoders are total: any byte string either yields a packet or raises a
ProtocolError subclass, never anything else.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

MAGIC = 0x5347
VERSION = 1

KIND_FULL = 0
KIND_CROP = 1
KIND_RESULT = 2

CMD_NONE = 0
CMD_START_ACTIVITY = 1
CMD_STOP_ACTIVITY = 2
CMD_RECALIBRATE = 3
_COMMANDS = (CMD_NONE, CMD_START_ACTIVITY, CMD_STOP_ACTIVITY, CMD_RECALIBRATE)

NO_LABEL = 255
MAX_LABELS = 254
CONFIDENCE_SCALE = 10000

# magic, version, kind, sequence, timestamp_us, source_w, source_h, w, h, crop_x, crop_y
_FRAME_HEADER = struct.Struct("<HBBIQHHHHHH")
# magic, version, kind, sequence, face_present, fx, fy, fw, fh, label, confidence, command
_RESULT = struct.Struct("<HBBIBHHHHBHB")

FRAME_HEADER_SIZE = _FRAME_HEADER.size   # 28
RESULT_SIZE = _RESULT.size               # 21
MAX_DATAGRAM = 65507                     # UDP over IPv4, no fragmentation
MAX_FRAME_PAYLOAD = MAX_DATAGRAM - FRAME_HEADER_SIZE


class ProtocolError(Exception):
    """Base for every decode/encode failure on the wire."""


class BadMagic(ProtocolError):
    pass


class BadVersion(ProtocolError):
    pass


class BadKind(ProtocolError):
    pass


class TruncatedPayload(ProtocolError):
    pass


class GeometryMismatch(ProtocolError):
    pass


class InvariantViolation(ProtocolError):
    pass


@dataclass(frozen=True)
class LabelSet:
    """Ordered emotion labels plus the index of the neutral expression."""

    labels: tuple[str, ...]
    neutral_index: int

    def __post_init__(self):
        if not self.labels:
            raise InvariantViolation("empty label set")
        if len(self.labels) > MAX_LABELS:
            raise InvariantViolation(f"{len(self.labels)} labels > {MAX_LABELS}")
        if len(set(self.labels)) != len(self.labels):
            raise InvariantViolation("duplicate label names")
        if not 0 <= self.neutral_index < len(self.labels):
            raise InvariantViolation("neutral_index out of range")

    def __len__(self) -> int:
        return len(self.labels)

    def name_of(self, index: int) -> str:
        return self.labels[index]

    def index_of(self, name: str) -> int:
        return self.labels.index(name)

    @classmethod
    def default(cls) -> "LabelSet":
        return cls(
            labels=(
                "happy", "sad", "angry", "scared",
                "surprised", "disgust", "contempt", "neutral",
            ),
            neutral_index=7,
        )


@dataclass(frozen=True)
class FramePacket:
    """One greyscale frame or face crop, raw 8-bit rows, no compression."""

    kind: int
    sequence: int
    timestamp_us: int
    source_width: int
    source_height: int
    width: int
    height: int
    crop_x: int
    crop_y: int
    payload: bytes

    def validate(self) -> None:
        if self.kind not in (KIND_FULL, KIND_CROP):
            raise InvariantViolation(f"frame kind {self.kind}")
        if not 0 < self.width <= 0xFFFF or not 0 < self.height <= 0xFFFF:
            raise InvariantViolation("zero or oversized frame geometry")
        if self.width * self.height != len(self.payload):
            raise InvariantViolation(
                f"payload {len(self.payload)} != {self.width}x{self.height}")
        if len(self.payload) > MAX_FRAME_PAYLOAD:
            raise InvariantViolation(
                f"payload {len(self.payload)} exceeds datagram bound")
        if self.crop_x + self.width > self.source_width:
            raise InvariantViolation("crop overruns source width")
        if self.crop_y + self.height > self.source_height:
            raise InvariantViolation("crop overruns source height")
        if self.kind == KIND_FULL and (self.crop_x, self.crop_y) != (0, 0):
            raise InvariantViolation("full frame with nonzero crop origin")
        if not 0 <= self.sequence <= 0xFFFFFFFF:
            raise InvariantViolation("sequence out of u32 range")
        if not 0 <= self.timestamp_us <= 0xFFFFFFFFFFFFFFFF:
            raise InvariantViolation("timestamp out of u64 range")


@dataclass(frozen=True)
class ResultPacket:
    """Per-frame host verdict: face rectangle in source coordinates,
    label index (255 = none), fixed-point confidence, command request."""

    sequence: int
    face_present: bool
    face_x: int = 0
    face_y: int = 0
    face_w: int = 0
    face_h: int = 0
    label: int = NO_LABEL
    confidence: int = 0          # fixed point, 0..10000
    command: int = CMD_NONE

    @property
    def confidence_unit(self) -> float:
        return self.confidence / CONFIDENCE_SCALE

    def validate(self) -> None:
        if not 0 <= self.sequence <= 0xFFFFFFFF:
            raise InvariantViolation("sequence out of u32 range")
        if not 0 <= self.confidence <= CONFIDENCE_SCALE:
            raise InvariantViolation(f"confidence {self.confidence} > 10000")
        if self.label != NO_LABEL and not 0 <= self.label < MAX_LABELS:
            raise InvariantViolation(f"label byte {self.label}")
        if self.command not in _COMMANDS:
            raise InvariantViolation(f"command {self.command}")
        if not self.face_present:
            if self.label != NO_LABEL or self.face_w or self.face_h:
                raise InvariantViolation("faceless result carrying face data")
        for v in (self.face_x, self.face_y, self.face_w, self.face_h):
            if not 0 <= v <= 0xFFFF:
                raise InvariantViolation("face rectangle out of u16 range")


def encode_frame(packet: FramePacket) -> bytes:
    packet.validate()
    header = _FRAME_HEADER.pack(
        MAGIC, VERSION, packet.kind, packet.sequence, packet.timestamp_us,
        packet.source_width, packet.source_height,
        packet.width, packet.height, packet.crop_x, packet.crop_y)
    return header + packet.payload


def decode_frame(data: bytes) -> FramePacket:
    if len(data) < FRAME_HEADER_SIZE:
        raise TruncatedPayload(f"{len(data)} bytes < {FRAME_HEADER_SIZE} header")
    (magic, version, kind, sequence, timestamp_us,
     src_w, src_h, width, height, crop_x, crop_y) = _FRAME_HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(hex(magic))
    if version != VERSION:
        raise BadVersion(str(version))
    if kind not in (KIND_FULL, KIND_CROP):
        raise BadKind(f"frame kind {kind}")
    expected = width * height
    got = len(data) - FRAME_HEADER_SIZE
    if got < expected:
        raise TruncatedPayload(f"payload {got} < {width}x{height}")
    if got > expected:
        raise GeometryMismatch(f"payload {got} > {width}x{height}")
    if width == 0 or height == 0:
        raise GeometryMismatch("zero frame geometry")
    if crop_x + width > src_w or crop_y + height > src_h:
        raise GeometryMismatch("crop outside source bounds")
    if kind == KIND_FULL and (crop_x, crop_y) != (0, 0):
        raise GeometryMismatch("full frame with nonzero crop origin")
    return FramePacket(kind, sequence, timestamp_us, src_w, src_h,
                       width, height, crop_x, crop_y,
                       data[FRAME_HEADER_SIZE:])


def encode_result(packet: ResultPacket) -> bytes:
    packet.validate()
    return _RESULT.pack(
        MAGIC, VERSION, KIND_RESULT, packet.sequence,
        1 if packet.face_present else 0,
        packet.face_x, packet.face_y, packet.face_w, packet.face_h,
        packet.label, packet.confidence, packet.command)


def decode_result(data: bytes) -> ResultPacket:
    if len(data) < RESULT_SIZE:
        raise TruncatedPayload(f"{len(data)} bytes < {RESULT_SIZE}")
    if len(data) > RESULT_SIZE:
        raise GeometryMismatch(f"{len(data)} bytes > {RESULT_SIZE}")
    (magic, version, kind, sequence, face_present,
     fx, fy, fw, fh, label, confidence, command) = _RESULT.unpack(data)
    if magic != MAGIC:
        raise BadMagic(hex(magic))
    if version != VERSION:
        raise BadVersion(str(version))
    if kind != KIND_RESULT:
        raise BadKind(f"result kind {kind}")
    packet = ResultPacket(sequence, bool(face_present), fx, fy, fw, fh,
                          label, confidence, command)
    packet.validate()
    return packet


def decode_packet(data: bytes) -> FramePacket | ResultPacket:
    """Dispatch on the kind byte; total over arbitrary input."""
    if len(data) < 4:
        raise TruncatedPayload(f"{len(data)} bytes < 4")
    magic, version, kind = struct.unpack_from("<HBB", data)
    if magic != MAGIC:
        raise BadMagic(hex(magic))
    if version != VERSION:
        raise BadVersion(str(version))
    if kind in (KIND_FULL, KIND_CROP):
        return decode_frame(data)
    if kind == KIND_RESULT:
        return decode_result(data)
    raise BadKind(str(kind))
