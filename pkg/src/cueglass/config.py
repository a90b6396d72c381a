"""Run configuration: one JSON file, per-subcommand sections, CLI overrides.

Every field has a sane desk-scale default so `sg-run` works with no config
at all.  Validation is strict about the things that corrupt runs silently:
geometry that is not an integer multiple of the low-res stream, rates and
fractions out of range, and referenced files that do not exist.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .calibrate import CalibrationPolicy
from .crop import CropParams
from .cue import CueFilterParams
from .features import HogParams
from .protocol import LabelSet
from .session import CurationParams
from .thermal import ThermalParams


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    duration_s: float = 10.0
    loss: float = 0.0
    latency_ms: float = 0.0
    host_addr: str = "127.0.0.1"
    port: int = 0                     # 0 = ephemeral, reported by sg-run
    nominal_fps: float = 30.0
    native: tuple[int, int] = (1280, 776)
    lowres: tuple[int, int] = (320, 194)
    capture: dict = field(default_factory=lambda: {"kind": "synthetic"})
    model_path: str | None = None
    locator: str = "synthetic"
    registration_margin: float = 0.0
    labels: LabelSet = field(default_factory=LabelSet.default)
    crop: CropParams = field(default_factory=CropParams)
    thermal: ThermalParams = field(default_factory=ThermalParams)
    hog: HogParams = field(default_factory=HogParams)
    filter: CueFilterParams = field(default_factory=CueFilterParams)
    curation: CurationParams | None = None   # None: inherit the filter floor
    calibration: CalibrationPolicy = field(default_factory=CalibrationPolicy)
    neutral_learning_rate: float = 0.05
    neutral_confidence_gate: float = 0.6
    stale_ms: float = 100.0
    session_root: str = "sessions"
    render_modalities: tuple[str, ...] = ("text", "color")
    indicator_style: str = "box"

    def curation_params(self) -> CurationParams:
        if self.curation is not None:
            return self.curation
        return CurationParams(confidence_floor=self.filter.confidence_floor)

    def validate(self) -> None:
        if self.duration_s <= 0:
            raise ConfigError(f"duration_s {self.duration_s}")
        if not 0.0 <= self.loss < 1.0:
            raise ConfigError(f"loss {self.loss}")
        if self.latency_ms < 0:
            raise ConfigError(f"latency_ms {self.latency_ms}")
        if self.nominal_fps <= 0:
            raise ConfigError(f"nominal_fps {self.nominal_fps}")
        if not 0 <= self.port <= 65535:
            raise ConfigError(f"port {self.port}")
        nw, nh = self.native
        lw, lh = self.lowres
        if nw % lw or nh % lh or nw // lw != nh // lh or nw // lw < 1:
            raise ConfigError(
                f"native {self.native} is not an integer multiple of "
                f"lowres {self.lowres}")
        if self.model_path is not None and not Path(self.model_path).exists():
            raise ConfigError(f"model file {self.model_path} does not exist")
        if self.capture.get("kind") not in ("synthetic", "dir"):
            raise ConfigError(f"capture kind {self.capture.get('kind')!r}")
        if self.capture.get("kind") == "dir":
            p = self.capture.get("path")
            if not p or not Path(p).is_dir():
                raise ConfigError(f"capture dir {p!r} does not exist")
        if self.stale_ms <= 0:
            raise ConfigError(f"stale_ms {self.stale_ms}")
        try:
            self.crop.validate()
            self.thermal.validate()
            self.hog.validate()
            self.filter.validate()
            self.curation_params().validate()
            self.calibration.validate()
        except ValueError as e:
            raise ConfigError(str(e)) from e


def _tuple2(v, what: str) -> tuple[int, int]:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"{what} must be [width, height]")
    return (int(v[0]), int(v[1]))


def load_config(path: str | Path | None = None,
                overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional JSON file plus flat overrides."""
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path}: {e}")

    cfg = RunConfig()
    top = {k: v for k, v in doc.items() if not isinstance(v, dict)}
    for key in ("seed", "duration_s", "loss", "latency_ms", "host_addr",
                "port", "nominal_fps", "model_path", "locator",
                "registration_margin", "session_root",
                "neutral_learning_rate", "neutral_confidence_gate",
                "stale_ms", "indicator_style"):
        if key in top:
            setattr(cfg, key, top[key])
    if "native" in doc:
        cfg.native = _tuple2(doc["native"], "native")
    if "lowres" in doc:
        cfg.lowres = _tuple2(doc["lowres"], "lowres")
    if "capture" in doc:
        cfg.capture = dict(doc["capture"])
    if "render_modalities" in doc:
        cfg.render_modalities = tuple(doc["render_modalities"])
    if "labels" in doc:
        sec = doc["labels"]
        names = tuple(sec["names"])
        cfg.labels = LabelSet(labels=names,
                              neutral_index=names.index(sec.get("neutral",
                                                                "neutral")))
    if "crop" in doc:
        cfg.crop = CropParams(**doc["crop"])
    if "thermal" in doc:
        cfg.thermal = ThermalParams(**doc["thermal"])
    if "hog" in doc:
        cfg.hog = HogParams(**doc["hog"])
    if "filter" in doc:
        sec = dict(doc["filter"])
        groups = sec.pop("groups", None)
        cfg.filter = CueFilterParams.from_label_groups(cfg.labels, groups,
                                                       **sec)
    if "curation" in doc:
        cfg.curation = CurationParams(**doc["curation"])
    if "calibration" in doc:
        cfg.calibration = CalibrationPolicy(**doc["calibration"])

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown override {key!r}")
        setattr(cfg, key, value)

    cfg.validate()
    return cfg


def snapshot(cfg: RunConfig) -> dict:
    """JSON-safe view of the resolved config, stored with each session."""
    doc = asdict(cfg)
    doc["labels"] = {"names": list(cfg.labels.labels),
                     "neutral": cfg.labels.name_of(cfg.labels.neutral_index)}
    doc["filter"]["related_groups"] = {
        str(k): v for k, v in cfg.filter.related_groups.items()}
    return json.loads(json.dumps(doc))
