"""Matplotlib figure rendering for timelines and run reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .render import DEFAULT_COLORS  # noqa: E402


def _label_color(name: str) -> str:
    return DEFAULT_COLORS.get(name, "#888888")


def plot_timeline(doc: dict, path: str | Path) -> None:
    """Horizontal-span view of a session timeline document."""
    fig, ax = plt.subplots(figsize=(10, 3.2))
    total_s = max(doc.get("duration_ms", 0.0) / 1000.0, 1e-3)

    lanes = {"moment": 2.0, "cue": 1.0, "annotation": 0.0}
    for e in doc.get("entries", []):
        kind = e["type"]
        if kind == "moment":
            start = e["start_ms"] / 1000.0
            width = max((e["end_ms"] - e["start_ms"]) / 1000.0, 0.02)
            ax.barh(lanes["moment"], width, left=start, height=0.6,
                    color=_label_color(e["label"]), edgecolor="black",
                    linewidth=0.5)
            ax.text(start + width / 2, lanes["moment"],
                    f"{e['label']} #{e['rank']}", ha="center", va="center",
                    fontsize=7)
        elif kind == "cue":
            ax.plot(e["start_ms"] / 1000.0, lanes["cue"], marker="v",
                    color=_label_color(e["label"]), markersize=8)
        elif kind == "annotation":
            start = e["start_ms"] / 1000.0
            width = max((e["end_ms"] - e["start_ms"]) / 1000.0, 0.02)
            ax.barh(lanes["annotation"], width, left=start, height=0.4,
                    color="none", edgecolor="#444444", hatch="//")

    ax.set_yticks(list(lanes.values()), list(lanes.keys()))
    ax.set_xlim(0, total_s)
    ax.set_ylim(-0.6, 2.6)
    ax.set_xlabel("session time (s)")
    ax.set_title(f"session {doc.get('session_id', '')}".strip())
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_report(report: dict, out_dir: str | Path) -> list[str]:
    """Per-second rate/thermal figures plus a latency histogram.
    Returns the written file paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    fps = report.get("fps_timeline", [])
    if fps:
        fig, ax = plt.subplots(figsize=(8, 3))
        ax.step(range(len(fps)), fps, where="post")
        target = report.get("nominal_fps")
        if target:
            ax.axhline(target, color="grey", linestyle="--", linewidth=0.8)
        ax.set_xlabel("second")
        ax.set_ylabel("frames sent")
        ax.set_title("achieved frame rate")
        fig.tight_layout()
        p = out / "fps_timeline.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        written.append(str(p))

    throttle = report.get("throttle_timeline", [])
    if throttle:
        fig, ax1 = plt.subplots(figsize=(8, 3))
        ax1.plot([t["temperature"] for t in throttle], color="#e03131")
        ax1.set_ylabel("temperature", color="#e03131")
        ax2 = ax1.twinx()
        ax2.plot([t["fps_factor"] for t in throttle], color="#1c7ed6")
        ax2.set_ylabel("fps factor", color="#1c7ed6")
        ax2.set_ylim(0, 1.05)
        ax1.set_xlabel("second")
        ax1.set_title("thermal throttle")
        fig.tight_layout()
        p = out / "throttle_timeline.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        written.append(str(p))

    lat = report.get("latency_samples_ms", [])
    if lat:
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.hist(lat, bins=30, color="#1c7ed6")
        ax.set_xlabel("frame-to-result latency (ms)")
        ax.set_ylabel("count")
        ax.set_title("round-trip latency")
        fig.tight_layout()
        p = out / "latency_hist.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        written.append(str(p))

    return written
