"""cueglass: desk-scale wearable social-cue pipeline.

A device agent streams greyscale frames over UDP to a host that locates
faces, classifies expressions, filters them into sparse cues, and records
reviewable sessions.  See protocol.md for the wire format and README.md
for the CLI tour.
"""

__version__ = "0.1.0"

from .protocol import FramePacket, LabelSet, ResultPacket  # noqa: F401
